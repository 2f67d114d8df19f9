use std::collections::BTreeMap;
use std::fmt;

use super::Coefficient;

/// Laurent polynomial in the Lefschetz class L with exact integer coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LefschetzPoly<C> {
    terms: BTreeMap<i32, C>,
}

impl<C: Coefficient> Default for LefschetzPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> LefschetzPoly<C> {
    pub fn zero() -> Self {
        LefschetzPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, c)
    }

    /// c·L^e
    pub fn monomial(e: i32, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LefschetzPoly { terms }
    }

    pub fn lefschetz() -> Self {
        Self::monomial(1, C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, C)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    /// 1 + L + ... + L^n, the class of projective n-space.
    pub fn projective_space(n: u32) -> Self {
        Self::from_terms((0..=n as i32).map(|e| (e, C::one())))
    }

    /// (1 − L)^n
    pub fn one_minus_l_pow(n: u32) -> Self {
        let base = Self::from_terms([(0, C::one()), (1, -C::one())]);
        base.pow(n)
    }

    fn add_term(&mut self, e: i32, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i32) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LefschetzPoly { terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &other.terms {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, x)| (e, x.clone() * c.clone())))
    }

    /// Multiplication by L^k.
    pub fn shift(&self, k: i32) -> Self {
        LefschetzPoly { terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Constant term, i.e. the image under L ↦ 0. Callers check exponents first.
    pub fn constant_term(&self) -> C {
        self.coeff(0)
    }
}

impl<C: Coefficient> fmt::Display for LefschetzPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let unit = abs.is_one();
            match e {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !unit {
                        write!(f, "{abs}*")?;
                    }
                    if e == 1 {
                        write!(f, "L")?;
                    } else {
                        write!(f, "L^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type P = LefschetzPoly<BigInt>;

    fn c(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn arithmetic_and_display() {
        let l = P::lefschetz();
        let one = P::one();
        assert_eq!(l.add(&l.neg()), P::zero());
        assert_eq!(l.sub(&one).add(&one), l);
        let prod = one.sub(&l).mul(&one.add(&l));
        assert_eq!(prod, P::from_terms([(0, c(1)), (2, c(-1))]));
        assert_eq!(prod.to_string(), "-L^2 + 1");
        assert_eq!(P::from_terms([(1, c(2)), (0, c(-1))]).to_string(), "2*L - 1");
        assert_eq!(P::monomial(-1, c(3)).to_string(), "3*L^-1");
        assert_eq!(P::one_minus_l_pow(2), P::from_terms([(0, c(1)), (1, c(-2)), (2, c(1))]));
    }

    #[test]
    fn projective_space_terms() {
        let p3 = P::projective_space(3);
        assert_eq!(p3.num_terms(), 4);
        assert_eq!(p3.constant_term(), c(1));
    }
}
