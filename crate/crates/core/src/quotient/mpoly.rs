//! Sparse multivariate polynomials over one level of a tower, and the
//! substitution check for invariance.

use std::collections::BTreeMap;
use std::fmt;

use crate::action::{kmat, AffineDatum, SemiLinearAffineAction};
use crate::gfq::{FieldElement, Fq};

/// Exponent vectors of length d mapped to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: FieldElement) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(f: Fq<'_>, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, f.one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &FieldElement)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_add(&mut self, f: Fq<'_>, e: Vec<u32>, c: &FieldElement) {
        let sum = match self.terms.get(&e) {
            Some(old) => f.add(old, c),
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum);
        }
    }

    pub fn add(&self, f: Fq<'_>, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert_add(f, e.clone(), c);
        }
        out
    }

    pub fn neg(&self, f: Fq<'_>) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), f.neg(c))).collect() }
    }

    pub fn sub(&self, f: Fq<'_>, o: &MPoly) -> MPoly {
        self.add(f, &o.neg(f))
    }

    pub fn mul(&self, f: Fq<'_>, o: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (a, c) in &self.terms {
            for (b, d) in &o.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.insert_add(f, e, &f.mul(c, d));
            }
        }
        out
    }

    pub fn pow(&self, f: Fq<'_>, n: u32) -> MPoly {
        let mut acc = MPoly::constant(self.nvars, f.one());
        for _ in 0..n {
            acc = acc.mul(f, self);
        }
        acc
    }

    /// Image under the ring map of a generator datum: scalars through the
    /// twist, x_i ↦ Σ_j A_ij x_j + a_i.
    pub fn act(&self, action: &SemiLinearAffineAction, g: &AffineDatum) -> MPoly {
        let f = action.field();
        let s = action.twist_exponent(g.twist);
        let images: Vec<MPoly> = (0..self.nvars)
            .map(|i| {
                let mut img = MPoly::constant(self.nvars, g.translation[i].clone());
                for j in 0..self.nvars {
                    let lin = MPoly::var(f, self.nvars, j).scale(f, &g.matrix[i][j]);
                    img = img.add(f, &lin);
                }
                img
            })
            .collect();
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = MPoly::constant(self.nvars, f.frob(c, s));
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(f, &images[i].pow(f, k));
                }
            }
            out = out.add(f, &term);
        }
        out
    }

    pub fn scale(&self, f: Fq<'_>, c: &FieldElement) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, a) in &self.terms {
            out.insert_add(f, e.clone(), &f.mul(a, c));
        }
        out
    }

    /// Linear change of variables x = T^{-1} y, i.e. the polynomial in the
    /// coordinates y = T x.
    pub fn in_new_coordinates(&self, f: Fq<'_>, t: &kmat::KMatrix) -> Option<MPoly> {
        let tinv = kmat::inverse(f, t)?;
        let images: Vec<MPoly> = (0..self.nvars)
            .map(|i| {
                (0..self.nvars).fold(MPoly::zero(self.nvars), |acc, j| {
                    acc.add(f, &MPoly::var(f, self.nvars, j).scale(f, &tinv[i][j]))
                })
            })
            .collect();
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = MPoly::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                term = term.mul(f, &images[i].pow(f, k));
            }
            out = out.add(f, &term);
        }
        Some(out)
    }

    pub fn eval(&self, f: Fq<'_>, point: &[FieldElement]) -> FieldElement {
        let mut acc = f.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                t = f.mul(&t, &f.pow(x, k as u64));
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    /// Parses `x^3 + 2*x*y^2 - t*y + 1`. Variables are `x, y, z, w` or
    /// `x1, x2, ...`; `t` is the generator of the field; integers are read
    /// modulo p.
    pub fn parse(f: Fq<'_>, nvars: usize, src: &str) -> Result<MPoly, String> {
        let mut out = MPoly::zero(nvars);
        let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err("empty polynomial".into());
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if ch == '-' && i == 0 {
                neg = true;
            } else if ch != '+' || i > 0 {
                cur.push(ch);
            }
        }
        terms.push((neg, cur));
        for (neg, term) in terms {
            if term.is_empty() {
                return Err("empty term".into());
            }
            let mut mono = MPoly::constant(nvars, f.one());
            for factor in term.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (b, e.parse::<u32>().map_err(|_| format!("bad exponent in {factor:?}"))?),
                    None => (factor, 1),
                };
                let value = if let Ok(n) = base.parse::<i64>() {
                    MPoly::constant(nvars, f.from_int(n))
                } else if base == "t" {
                    MPoly::constant(nvars, f.generator())
                } else {
                    let idx = variable_index(base).ok_or_else(|| format!("unknown variable {base:?}"))?;
                    if idx >= nvars {
                        return Err(format!("variable {base} outside dimension {nvars}"));
                    }
                    MPoly::var(f, nvars, idx)
                };
                mono = mono.mul(f, &value.pow(f, exp));
            }
            out = if neg { out.sub(f, &mono) } else { out.add(f, &mono) };
        }
        Ok(out)
    }
}

fn variable_index(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        "w" => Some(3),
        _ => name.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()).filter(|&i| i >= 1).map(|i| i - 1),
    }
}

/// Whether every generator of the action fixes `poly`.
pub fn invariant_check(poly: &MPoly, action: &SemiLinearAffineAction) -> bool {
    poly.nvars() == action.dimension() && action.generators().iter().all(|g| poly.act(action, &g.datum) == *poly)
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = if self.nvars <= 4 {
            ["x", "y", "z", "w"][..self.nvars].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=self.nvars).map(|i| format!("x{i}")).collect()
        };
        let mut parts = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            let cs = c.to_string();
            let is_const = e.iter().all(|&k| k == 0);
            if cs != "1" || is_const {
                factors.push(if cs.contains('+') { format!("({cs})") } else { cs });
            }
            for (name, &k) in names.iter().zip(e) {
                match k {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{k}")),
                }
            }
            parts.push(factors.join("*"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}
