use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Coefficient, MclassError, MotivicClass};

/// Commutative rings that classes can be realized in.
pub trait RealizationTarget:
    Clone + PartialEq + fmt::Debug + fmt::Display + Zero + One + Add<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_bigint(c: &BigInt) -> Self;

    /// Multiplicative inverse when it exists in the target.
    fn try_inverse(&self) -> Option<Self>;

    /// Canonical representative of `self` modulo the ideal generated by `l`.
    fn reduce_mod(&self, l: &Self) -> Option<Self>;
}

impl RealizationTarget for BigInt {
    fn from_bigint(c: &BigInt) -> Self {
        c.clone()
    }

    fn try_inverse(&self) -> Option<Self> {
        if self.abs().is_one() {
            Some(self.clone())
        } else {
            None
        }
    }

    fn reduce_mod(&self, l: &Self) -> Option<Self> {
        if l.is_zero() {
            return Some(self.clone());
        }
        Some(self.mod_floor(&l.abs()))
    }
}

/// Integer polynomial in u and v, the target of the Hodge–Deligne realization.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct UvPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl UvPoly {
    pub fn monomial(u: u32, v: u32, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((u, v), c);
        }
        UvPoly { terms }
    }

    /// The monomial u·v.
    pub fn uv() -> Self {
        Self::monomial(1, 1, BigInt::one())
    }

    pub fn coeff(&self, u: u32, v: u32) -> BigInt {
        self.terms.get(&(u, v)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &BigInt)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    fn insert_add(&mut self, k: (u32, u32), c: BigInt) {
        let e = self.terms.entry(k).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn as_monomial(&self) -> Option<((u32, u32), &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(&k, c)| (k, c))
        } else {
            None
        }
    }
}

impl Add for UvPoly {
    type Output = UvPoly;
    fn add(mut self, rhs: UvPoly) -> UvPoly {
        for (k, c) in rhs.terms {
            self.insert_add(k, c);
        }
        self
    }
}

impl Neg for UvPoly {
    type Output = UvPoly;
    fn neg(self) -> UvPoly {
        UvPoly { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl Mul for UvPoly {
    type Output = UvPoly;
    fn mul(self, rhs: UvPoly) -> UvPoly {
        let mut out = UvPoly::default();
        for (&(a, b), c) in &self.terms {
            for (&(x, y), d) in &rhs.terms {
                out.insert_add((a + x, b + y), c * d);
            }
        }
        out
    }
}

impl Zero for UvPoly {
    fn zero() -> Self {
        UvPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for UvPoly {
    fn one() -> Self {
        UvPoly::monomial(0, 0, BigInt::one())
    }
}

impl fmt::Display for UvPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let abs = c.abs();
            let mut parts = Vec::new();
            if !abs.is_one() || (a == 0 && b == 0) {
                parts.push(abs.to_string());
            }
            for (name, e) in [("u", a), ("v", b)] {
                match e {
                    0 => {}
                    1 => parts.push(name.to_string()),
                    _ => parts.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl RealizationTarget for UvPoly {
    fn from_bigint(c: &BigInt) -> Self {
        UvPoly::monomial(0, 0, c.clone())
    }

    fn try_inverse(&self) -> Option<Self> {
        match self.as_monomial() {
            Some(((0, 0), c)) if c.abs().is_one() => Some(self.clone()),
            _ => None,
        }
    }

    /// Supported when `l` is a monomial with unit coefficient: drops every
    /// term divisible by it.
    fn reduce_mod(&self, l: &Self) -> Option<Self> {
        let ((a, b), c) = l.as_monomial()?;
        if !c.abs().is_one() {
            return None;
        }
        let terms = self.terms.iter().filter(|(&(x, y), _)| !(x >= a && y >= b)).map(|(&k, c)| (k, c.clone())).collect();
        Some(UvPoly { terms })
    }
}

/// Images of L and of the stratum symbols in a target ring.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationSpec<T> {
    pub l_image: T,
    pub symbol_images: BTreeMap<String, T>,
}

impl<T: RealizationTarget> RealizationSpec<T> {
    pub fn new(l_image: T) -> Self {
        RealizationSpec { l_image, symbol_images: BTreeMap::new() }
    }

    pub fn with_symbol(mut self, name: &str, image: T) -> Self {
        self.symbol_images.insert(name.to_string(), image);
        self
    }
}

impl RealizationSpec<BigInt> {
    /// Counting points over F_q: L ↦ q.
    pub fn point_count(q: u64) -> Self {
        Self::new(BigInt::from(q))
    }
}

impl RealizationSpec<UvPoly> {
    /// Hodge–Deligne polynomial: L ↦ uv.
    pub fn hodge_deligne() -> Self {
        Self::new(UvPoly::uv())
    }
}

fn pow_target<T: RealizationTarget>(x: &T, e: u32) -> T {
    let mut acc = T::one();
    for _ in 0..e {
        acc = acc * x.clone();
    }
    acc
}

impl<C: Coefficient> MotivicClass<C> {
    /// Ring-homomorphic image in the target of `spec`. Residues modulo L are
    /// reduced modulo the image of L.
    pub fn realize<T: RealizationTarget>(&self, spec: &RealizationSpec<T>) -> Result<T, MclassError> {
        let mut total = T::zero();
        let l_inv = if self.terms().any(|(_, p)| p.min_exponent().is_some_and(|e| e < 0)) {
            Some(spec.l_image.try_inverse().ok_or(MclassError::NotInvertible)?)
        } else {
            None
        };
        for (m, p) in self.terms() {
            let mut coeff = T::zero();
            for (e, c) in p.terms() {
                let base = if e >= 0 {
                    pow_target(&spec.l_image, e as u32)
                } else {
                    pow_target(l_inv.as_ref().expect("checked above"), e.unsigned_abs())
                };
                let c = c.to_bigint().expect("integer coefficient");
                coeff = coeff + T::from_bigint(&c) * base;
            }
            let mut mono = T::one();
            for (s, e) in m.powers() {
                let img = spec.symbol_images.get(s).ok_or_else(|| MclassError::MissingSymbolImage(s.to_string()))?;
                mono = mono * pow_target(img, e);
            }
            total = total + coeff * mono;
        }
        if self.tag().is_residue() {
            total = total.reduce_mod(&spec.l_image).ok_or(MclassError::UnsupportedReduction)?;
        }
        Ok(total)
    }
}
