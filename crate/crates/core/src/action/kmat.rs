//! Small dense matrices over one level of a tower.

use crate::gfq::{FieldElement, Fq};

pub type KMatrix = Vec<Vec<FieldElement>>;

pub fn identity(f: Fq<'_>, d: usize) -> KMatrix {
    (0..d).map(|i| (0..d).map(|j| if i == j { f.one() } else { f.zero() }).collect()).collect()
}

pub fn zero_vec(f: Fq<'_>, d: usize) -> Vec<FieldElement> {
    vec![f.zero(); d]
}

pub fn mul(f: Fq<'_>, a: &KMatrix, b: &KMatrix) -> KMatrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = f.zero();
                    for t in 0..k {
                        acc = f.add(&acc, &f.mul(&a[i][t], &b[t][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn apply(f: Fq<'_>, a: &KMatrix, v: &[FieldElement]) -> Vec<FieldElement> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(f.zero(), |acc, (x, y)| f.add(&acc, &f.mul(x, y))))
        .collect()
}

pub fn add_vec(f: Fq<'_>, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    a.iter().zip(b).map(|(x, y)| f.add(x, y)).collect()
}

pub fn sub_vec(f: Fq<'_>, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    a.iter().zip(b).map(|(x, y)| f.sub(x, y)).collect()
}

/// Entrywise `x ↦ x^{p^s}`.
pub fn frob_mat(f: Fq<'_>, a: &KMatrix, s: usize) -> KMatrix {
    a.iter().map(|r| frob_vec(f, r, s)).collect()
}

pub fn frob_vec(f: Fq<'_>, v: &[FieldElement], s: usize) -> Vec<FieldElement> {
    v.iter().map(|x| f.frob(x, s)).collect()
}

/// Row reduction; returns the rank and, for square input, the inverse.
fn reduce(f: Fq<'_>, a: &KMatrix, want_inverse: bool) -> (usize, Option<KMatrix>) {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<FieldElement>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            if want_inverse {
                r.extend((0..n).map(|j| if i == j { f.one() } else { f.zero() }));
            }
            r
        })
        .collect();
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..m {
        let Some(piv) = (rank..n).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, piv);
        let inv = f.inv(&rows[rank][c]).expect("nonzero pivot");
        for j in 0..width {
            rows[rank][j] = f.mul(&rows[rank][j], &inv);
        }
        for i in 0..n {
            if i != rank && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..width {
                    let t = f.mul(&factor, &rows[rank][j]);
                    rows[i][j] = f.sub(&rows[i][j], &t);
                }
            }
        }
        rank += 1;
    }
    if want_inverse && rank == n && n == m {
        let inv = rows.into_iter().map(|r| r[m..].to_vec()).collect();
        (rank, Some(inv))
    } else {
        (rank, None)
    }
}

pub fn rank(f: Fq<'_>, a: &KMatrix) -> usize {
    reduce(f, a, false).0
}

pub fn inverse(f: Fq<'_>, a: &KMatrix) -> Option<KMatrix> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    reduce(f, a, true).1
}

pub fn is_identity(f: Fq<'_>, a: &KMatrix) -> bool {
    *a == identity(f, a.len())
}
