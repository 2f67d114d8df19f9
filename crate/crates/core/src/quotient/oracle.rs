//! Point counts of quotients by counting Frobenius-stable orbits.
//!
//! A point of V = A^d_K over a finite field F ⊇ K is a pair (ι_e, v) with
//! ι_e = ι_0 ∘ σ^e one of the n k-embeddings of K and v ∈ F^d. The group
//! acts by precomposition with the ring maps: (σ^t, A, a) sends (ι_e, v) to
//! (ι_{e+t}, ι_e(A)v + ι_e(a)). The q-Frobenius sends (ι_e, v) to
//! (ι_{e+1}, v^q). |(V/G)(F_{q^m})| is the number of orbits stable under the
//! m-th power of Frobenius.
//!
//! Every point of a stable orbit is fixed by Frobenius^{m·E}, E the exponent
//! of G, so all the points involved live over F_{q^{mE}}. The default count
//! uses the twisted Burnside formula over that field,
//! #orbits = |G|^{-1} Σ_g #{P : g·P = Fr^m(P)}, where each summand is the size
//! of an F_p-affine solution space. [`OracleMode::Enumerate`] walks the
//! points instead and is only feasible for small fields.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{kmat::KMatrix, SemiLinearAffineAction};
use crate::gfq::{FieldElement, FieldTower, FpMatrix, Fq};

use super::{InvariantRingResult, QuotientError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Largest absolute degree of the counting field.
    pub max_field_degree: usize,
    /// Largest number of points walked in enumeration mode.
    pub max_points: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_field_degree: 64, max_points: 1 << 22 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    #[default]
    Burnside,
    Enumerate,
}

/// A point (ι_e, v) over the counting field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub embedding: u32,
    pub coords: Vec<FieldElement>,
}

struct ElementImage {
    word: Vec<u64>,
    twist: u32,
    /// Per embedding e: ι_e(A), ι_e(a).
    images: Vec<(KMatrix, Vec<FieldElement>)>,
}

/// The points of V over F_{q^M}, with the group and Frobenius acting.
pub struct PointSpace {
    tower: FieldTower,
    level: usize,
    n: u32,
    base_degree: usize,
    dimension: usize,
    elements: Vec<ElementImage>,
    multiplier: usize,
}

impl PointSpace {
    /// Points over F_{q^M}; M must be a multiple of [K:k].
    pub fn new(a: &SemiLinearAffineAction, multiplier: usize, budget: &OracleBudget) -> Result<Self, QuotientError> {
        let n = a.n() as usize;
        if multiplier == 0 || multiplier % n != 0 {
            return Err(QuotientError::Internal(format!("F_q^{multiplier} does not contain K")));
        }
        let degree = a.base_degree() * multiplier;
        let max = budget.max_field_degree.min(a.tower().limits().max_degree);
        if degree > max {
            return Err(QuotientError::BudgetExceeded { required_degree: degree, max });
        }
        let kdeg = a.tower().degree(a.field_level());
        let (tower, level) = if degree == kdeg {
            (a.tower().clone(), a.field_level())
        } else {
            (a.tower().extended(a.field_level(), degree)?, a.field_level() + 1)
        };
        let elements = {
            let f = tower.level(level);
            let embed = |c: &FieldElement, e: usize| -> FieldElement {
                let up = tower.embed(c, level).expect("K embeds in the counting field");
                f.frob(&up, a.base_degree() * e)
            };
            a.group_elements()
                .into_iter()
                .map(|g| ElementImage {
                    word: g.word,
                    twist: g.datum.twist,
                    images: (0..n)
                        .map(|e| {
                            (
                                g.datum.matrix.iter().map(|r| r.iter().map(|c| embed(c, e)).collect()).collect(),
                                g.datum.translation.iter().map(|c| embed(c, e)).collect(),
                            )
                        })
                        .collect(),
                })
                .collect()
        };
        Ok(PointSpace { tower, level, n: n as u32, base_degree: a.base_degree(), dimension: a.dimension(), elements, multiplier })
    }

    pub fn field(&self) -> Fq<'_> {
        self.tower.level(self.level)
    }

    /// M with the counting field F_{q^M}.
    pub fn multiplier(&self) -> usize {
        self.multiplier
    }

    pub fn group_order(&self) -> usize {
        self.elements.len()
    }

    pub fn words(&self) -> impl Iterator<Item = &[u64]> {
        self.elements.iter().map(|e| e.word.as_slice())
    }

    /// Number of points n·|F|^d, if it fits.
    pub fn num_points(&self) -> Option<u128> {
        let size = self.field().size_u128()?;
        size.checked_pow(self.dimension as u32)?.checked_mul(self.n as u128)
    }

    pub fn point(&self, mut index: u128) -> Point {
        let f = self.field();
        let size = f.size_u128().expect("enumerable field");
        let embedding = (index % self.n as u128) as u32;
        index /= self.n as u128;
        let coords = (0..self.dimension)
            .map(|_| {
                let c = f.from_index(index % size);
                index /= size;
                c
            })
            .collect();
        Point { embedding, coords }
    }

    pub fn index(&self, p: &Point) -> u128 {
        let f = self.field();
        let size = f.size_u128().expect("enumerable field");
        let mut idx: u128 = 0;
        for c in p.coords.iter().rev() {
            idx = idx * size + f.index_of(c);
        }
        idx * self.n as u128 + p.embedding as u128
    }

    /// Action of the element with position `i` in [`Self::words`].
    pub fn act(&self, i: usize, p: &Point) -> Point {
        let f = self.field();
        let el = &self.elements[i];
        let (m, t) = &el.images[p.embedding as usize];
        let v = crate::action::kmat::add_vec(f, &crate::action::kmat::apply(f, m, &p.coords), t);
        Point { embedding: (p.embedding + el.twist) % self.n, coords: v }
    }

    /// m-th power of the q-Frobenius.
    pub fn frobenius(&self, p: &Point, m: usize) -> Point {
        let f = self.field();
        Point {
            embedding: ((p.embedding as usize + m) % self.n as usize) as u32,
            coords: p.coords.iter().map(|c| f.frob(c, self.base_degree * m)).collect(),
        }
    }

    fn orbit_indices(&self, p: &Point) -> Vec<u128> {
        let mut out: Vec<u128> = (0..self.elements.len()).map(|i| self.index(&self.act(i, p))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Value of a polynomial with coefficients in K at the point.
    pub fn evaluate(&self, a: &SemiLinearAffineAction, poly: &super::KPoly, p: &Point) -> FieldElement {
        let f = self.field();
        let x = &p.coords[0];
        let mut acc = f.zero();
        for c in poly.coeffs().iter().rev() {
            let up = self.tower.embed(c, self.level).expect("K embeds");
            let img = f.frob(&up, a.base_degree() * p.embedding as usize);
            acc = f.add(&f.mul(&acc, x), &img);
        }
        acc
    }
}

/// Solution count of v^{q^m} = ι_e(A) v + ι_e(a) over F^d.
fn twisted_fixed_count(space: &PointSpace, el: &ElementImage, e: usize, m: usize) -> BigUint {
    let f = space.field();
    let p = f.p();
    let nf = f.degree();
    let d = space.dimension;
    let (a, t) = &el.images[e];
    let frob = f.frob_matrix_power(space.base_degree * m);
    let mut op = FpMatrix::zeros(p, d * nf, d * nf);
    for i in 0..d {
        for j in 0..d {
            let mut block = f.mul_matrix(&a[i][j]);
            if i == j {
                block = frob.sub(&block);
            } else {
                block = FpMatrix::zeros(p, nf, nf).sub(&block);
            }
            for r in 0..nf {
                for c in 0..nf {
                    op.set(i * nf + r, j * nf + c, block.get(r, c));
                }
            }
        }
    }
    let rhs: Vec<u32> = t.iter().flat_map(|c| c.coords().to_vec()).collect();
    match op.solve(&rhs) {
        Some(_) => BigUint::from(p).pow((d * nf - op.rank()) as u32),
        None => BigUint::zero(),
    }
}

/// Number of F_{q^m}-points of V/G.
pub fn orbit_count_oracle(a: &SemiLinearAffineAction, m: u32, mode: OracleMode, budget: &OracleBudget) -> Result<BigUint, QuotientError> {
    if m == 0 {
        return Err(QuotientError::Internal("m must be positive".into()));
    }
    let m = m as usize;
    let exponent = a.group_exponent() as usize;
    let n = a.n() as usize;
    let multiplier = (m * exponent).lcm(&n);
    let space = PointSpace::new(a, multiplier, budget)?;
    match mode {
        OracleMode::Burnside => {
            let total: BigUint = space
                .elements
                .par_iter()
                .map(|el| {
                    (0..n)
                        .filter(|_| (el.twist as usize + n - m % n) % n == 0)
                        .map(|e| twisted_fixed_count(&space, el, e, m))
                        .sum::<BigUint>()
                })
                .sum();
            let g = BigUint::from(space.group_order());
            let (quot, rem) = total.div_rem(&g);
            if !rem.is_zero() {
                return Err(QuotientError::Internal(format!("Burnside sum {total} not divisible by |G| = {g}")));
            }
            Ok(quot)
        }
        OracleMode::Enumerate => {
            let points = space.num_points().filter(|&c| c <= budget.max_points as u128).ok_or(QuotientError::EnumerationTooLarge {
                points: space.num_points(),
                max: budget.max_points,
            })?;
            let count = (0..points as usize)
                .into_par_iter()
                .with_min_len(256)
                .filter(|&idx| {
                    let pt = space.point(idx as u128);
                    let orbit = space.orbit_indices(&pt);
                    orbit[0] == idx as u128 && orbit.binary_search(&space.index(&space.frobenius(&pt, m))).is_ok()
                })
                .count();
            Ok(BigUint::from(count))
        }
    }
}

/// Subgroup fixing a point, as exponent words in the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerDatum {
    pub point: Point,
    pub subgroup: Vec<Vec<u64>>,
    pub orbit_size: usize,
    pub group_order: usize,
}

impl StabilizerDatum {
    pub fn orbit_stabilizer_holds(&self) -> bool {
        self.orbit_size * self.subgroup.len() == self.group_order
    }
}

pub fn stabilizer(space: &PointSpace, point: &Point) -> StabilizerDatum {
    let mut subgroup = Vec::new();
    let mut orbit = Vec::new();
    for (i, el) in space.elements.iter().enumerate() {
        let img = space.act(i, point);
        if img == *point {
            subgroup.push(el.word.clone());
        }
        if !orbit.contains(&img) {
            orbit.push(img);
        }
    }
    StabilizerDatum { point: point.clone(), subgroup, orbit_size: orbit.len(), group_order: space.group_order() }
}

/// Count through the presented generator Y of a one-dimensional quotient,
/// with a pointwise check of the presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedCount {
    /// |k'|^m for the field k' over which K[x]^G = k'[Y].
    pub presented: BigUint,
    /// Orbits examined over F_{q^M}.
    pub orbits: usize,
    /// Y is constant on every orbit.
    pub constant_on_orbits: bool,
    /// Distinct orbits have distinct Y-values.
    pub separates_orbits: bool,
    /// Fr^m-stable orbits, all of which have Y-value in F_{q^m}.
    pub rational_orbits: usize,
    pub rational_values_in_base: bool,
}

impl PresentedCount {
    pub fn consistent(&self) -> bool {
        self.constant_on_orbits && self.separates_orbits && self.rational_values_in_base
    }
}

pub fn presented_count(
    a: &SemiLinearAffineAction,
    result: &InvariantRingResult,
    m: u32,
    budget: &OracleBudget,
) -> Result<PresentedCount, QuotientError> {
    let q_prime = BigUint::from(a.p()).pow(result.invariant_field_degree as u32);
    let presented = q_prime.pow(m);
    let mm = m as usize;
    let multiplier = mm.lcm(&(a.n() as usize));
    let space = PointSpace::new(a, multiplier, budget)?;
    let points = space
        .num_points()
        .filter(|&c| c <= budget.max_points as u128)
        .ok_or(QuotientError::EnumerationTooLarge { points: space.num_points(), max: budget.max_points })?;
    let f = space.field();
    let sub_m = a.base_degree() * mm;
    // (orbit representative, value, rational)
    let rows: Vec<(bool, Option<(FieldElement, bool)>)> = (0..points as usize)
        .into_par_iter()
        .with_min_len(256)
        .map(|idx| {
            let pt = space.point(idx as u128);
            let orbit = space.orbit_indices(&pt);
            let y = space.evaluate(a, &result.generator_poly, &pt);
            let constant = orbit.iter().all(|&j| space.evaluate(a, &result.generator_poly, &space.point(j)) == y);
            if orbit[0] != idx as u128 {
                return (constant, None);
            }
            let stable = orbit.binary_search(&space.index(&space.frobenius(&pt, mm))).is_ok();
            (constant, Some((y, stable)))
        })
        .collect();
    let constant_on_orbits = rows.iter().all(|r| r.0);
    let reps: Vec<&(FieldElement, bool)> = rows.iter().filter_map(|r| r.1.as_ref()).collect();
    let mut values: Vec<&FieldElement> = reps.iter().map(|r| &r.0).collect();
    values.sort();
    values.dedup();
    let separates_orbits = values.len() == reps.len();
    let rational: Vec<&&(FieldElement, bool)> = reps.iter().filter(|r| r.1).collect();
    let rational_values_in_base = rational.iter().all(|r| f.in_subfield(&r.0, sub_m));
    Ok(PresentedCount {
        presented,
        orbits: reps.len(),
        constant_on_orbits,
        separates_orbits,
        rational_orbits: rational.len(),
        rational_values_in_base,
    })
}
