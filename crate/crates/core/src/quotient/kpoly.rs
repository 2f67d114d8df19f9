//! Univariate polynomials over one level of a tower.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gfq::{FieldElement, Fq};

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KPoly {
    coeffs: Vec<FieldElement>,
}

impl KPoly {
    pub fn from_coeffs(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        KPoly { coeffs }
    }

    pub fn zero() -> Self {
        KPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn x(f: Fq<'_>) -> Self {
        KPoly { coeffs: vec![f.zero(), f.one()] }
    }

    /// λx + c
    pub fn linear(lambda: &FieldElement, c: &FieldElement) -> Self {
        Self::from_coeffs(vec![c.clone(), lambda.clone()])
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, f: Fq<'_>, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn add(&self, f: Fq<'_>, o: &KPoly) -> KPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| f.add(&self.coeff(f, i), &o.coeff(f, i))).collect())
    }

    pub fn sub(&self, f: Fq<'_>, o: &KPoly) -> KPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| f.sub(&self.coeff(f, i), &o.coeff(f, i))).collect())
    }

    pub fn scale(&self, f: Fq<'_>, c: &FieldElement) -> KPoly {
        Self::from_coeffs(self.coeffs.iter().map(|a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: Fq<'_>, o: &KPoly) -> KPoly {
        if self.is_zero() || o.is_zero() {
            return KPoly::zero();
        }
        let mut out = vec![f.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(a, b));
            }
        }
        Self::from_coeffs(out)
    }

    pub fn pow(&self, f: Fq<'_>, e: u64) -> KPoly {
        let mut acc = KPoly::constant(f.one());
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    /// self(inner(x))
    pub fn compose(&self, f: Fq<'_>, inner: &KPoly) -> KPoly {
        let mut acc = KPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(f, inner).add(f, &KPoly::constant(c.clone()));
        }
        acc
    }

    pub fn eval(&self, f: Fq<'_>, a: &FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(f.zero(), |acc, c| f.add(&f.mul(&acc, a), c))
    }

    /// Coefficients raised to p^s.
    pub fn frob(&self, f: Fq<'_>, s: usize) -> KPoly {
        KPoly { coeffs: self.coeffs.iter().map(|c| f.frob(c, s)).collect() }
    }

    /// Image under the ring map acting by Frobenius^s on scalars and
    /// x ↦ λx + c.
    pub fn act(&self, f: Fq<'_>, s: usize, lambda: &FieldElement, c: &FieldElement) -> KPoly {
        self.frob(f, s).compose(f, &KPoly::linear(lambda, c))
    }

    pub fn to_coords(&self) -> Vec<Vec<u32>> {
        self.coeffs.iter().map(|c| c.coords().to_vec()).collect()
    }

    pub fn from_coords(f: Fq<'_>, c: &[Vec<u32>]) -> KPoly {
        Self::from_coeffs(c.iter().map(|v| f.from_coords(v)).collect())
    }
}

/// Serialized polynomial: coefficient coordinate vectors, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub coeffs: Vec<Vec<u32>>,
    pub text: String,
}

impl From<&KPoly> for PolyRecord {
    fn from(p: &KPoly) -> Self {
        PolyRecord { coeffs: p.to_coords(), text: p.to_string() }
    }
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            let simple = !cs.contains(['+', ' ']);
            match (i, cs.as_str()) {
                (0, _) => write!(f, "{}", if simple { cs } else { format!("({cs})") })?,
                (_, "1") => {}
                _ if simple => write!(f, "{cs}*")?,
                _ => write!(f, "({cs})*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfq::FieldTower;

    #[test]
    fn compose_and_act() {
        let t = FieldTower::new(5, &[1]).unwrap();
        let f = t.level(0);
        let x = KPoly::x(f);
        let sq = x.mul(f, &x);
        // (x + 1)^2 = x^2 + 2x + 1
        let shifted = sq.act(f, 0, &f.one(), &f.one());
        assert_eq!(shifted, KPoly::from_coeffs(vec![f.one(), f.from_int(2), f.one()]));
        assert_eq!(sq.compose(f, &KPoly::linear(&f.one(), &f.one())), shifted);
        assert_eq!(shifted.eval(f, &f.from_int(4)), f.zero());
        assert_eq!(shifted.to_string(), "x^2 + 2*x + 1");
    }

    #[test]
    fn frobenius_on_coefficients() {
        let t = FieldTower::new(2, &[2]).unwrap();
        let f = t.level(0);
        let g = f.generator();
        let p = KPoly::linear(&g, &f.zero());
        assert_eq!(p.frob(f, 1), KPoly::linear(&f.mul(&g, &g), &f.zero()));
    }
}
