//! Motivic classes: formal combinations of stratum symbols with coefficients
//! in Z[L, L^-1], tagged with the ring they live in.
//!
//! Equality is equality of canonical forms under the rewrite rules registered
//! in a [`Session`]; nothing here tries to decide equality in the true
//! Grothendieck ring.

mod poly;
mod realize;
mod session;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::ToBigInt;
use num_traits::{FromPrimitive, Signed};
use thiserror::Error;

pub use poly::LefschetzPoly;
pub use realize::{RealizationSpec, RealizationTarget, UvPoly};
pub use session::{Session, StratumSymbol};
pub use text::{parse_class, ClassDoc, TermDoc};

/// Integer types usable as coefficients.
pub trait Coefficient:
    Clone + Ord + std::hash::Hash + fmt::Debug + fmt::Display + FromStr + Signed + ToBigInt + FromPrimitive + Send + Sync + 'static
{
}

impl<T> Coefficient for T where
    T: Clone
        + Ord
        + std::hash::Hash
        + fmt::Debug
        + fmt::Display
        + FromStr
        + Signed
        + ToBigInt
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MclassError {
    #[error("ring tags differ: {0} vs {1}")]
    TagMismatch(RingTag, RingTag),
    #[error("no coercion from {0} to {1}")]
    IllegalCoercion(RingTag, RingTag),
    #[error("negative power of L in {0}: the class is not visibly in the image of K0")]
    NegativeExponent(String),
    #[error("L^{0} requires a localized ring tag")]
    NotLocalized(i32),
    #[error("symbol {0} already has a definition")]
    SymbolAlreadyDefined(String),
    #[error("symbol {0} is already declared")]
    DuplicateSymbol(String),
    #[error("definition of {0} is circular")]
    CircularDefinition(String),
    #[error("identifying symbols requires a *_mod tag, got {0}")]
    IdentificationRequiresModTag(RingTag),
    #[error("no image given for symbol {0}")]
    MissingSymbolImage(String),
    #[error("the image of L is not invertible in the target")]
    NotInvertible,
    #[error("reduction modulo the image of L is not supported for this target")]
    UnsupportedReduction,
    #[error("acted symbol {symbol} (mu_{order}) cannot appear in a class tagged {tag}")]
    EquivariantSymbol { symbol: String, order: u32, tag: RingTag },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseRing {
    K0,
    K0Mod,
    M,
    MMod,
}

/// Which ring a class lives in: the base ring, an optional μ_m-equivariant
/// structure, and whether the class is a residue modulo L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingTag {
    base: BaseRing,
    equivariant: Option<u32>,
    residue: bool,
}

impl RingTag {
    pub const K0: RingTag = RingTag { base: BaseRing::K0, equivariant: None, residue: false };
    pub const K0_MOD: RingTag = RingTag { base: BaseRing::K0Mod, equivariant: None, residue: false };
    pub const M: RingTag = RingTag { base: BaseRing::M, equivariant: None, residue: false };
    pub const M_MOD: RingTag = RingTag { base: BaseRing::MMod, equivariant: None, residue: false };

    pub fn k0_eq(m: u32) -> RingTag {
        assert!(m >= 1);
        RingTag { base: BaseRing::K0, equivariant: Some(m), residue: false }
    }

    pub fn m_eq(m: u32) -> RingTag {
        assert!(m >= 1);
        RingTag { base: BaseRing::M, equivariant: Some(m), residue: false }
    }

    pub fn base(self) -> BaseRing {
        self.base
    }
    pub fn equivariant(self) -> Option<u32> {
        self.equivariant
    }
    pub fn is_residue(self) -> bool {
        self.residue
    }
    pub fn is_localized(self) -> bool {
        matches!(self.base, BaseRing::M | BaseRing::MMod)
    }
    pub fn is_mod(self) -> bool {
        matches!(self.base, BaseRing::K0Mod | BaseRing::MMod)
    }

    /// The tag of residues modulo L of classes with this tag.
    pub fn residue(self) -> RingTag {
        RingTag { residue: true, ..self }
    }

    /// Same tag without the equivariant structure.
    pub fn plain(self) -> RingTag {
        RingTag { equivariant: None, ..self }
    }

    pub fn with_base(self, base: BaseRing) -> RingTag {
        RingTag { base, ..self }
    }

    /// Whether a ring map `self → to` is available as a coercion.
    pub fn coerces_to(self, to: RingTag) -> bool {
        if self == to {
            return true;
        }
        if self.residue != to.residue {
            return false;
        }
        let base_ok = matches!(
            (self.base, to.base),
            (a, b) if a == b
        ) || matches!(
            (self.base, to.base),
            (BaseRing::K0, BaseRing::K0Mod)
                | (BaseRing::K0, BaseRing::M)
                | (BaseRing::K0, BaseRing::MMod)
                | (BaseRing::K0Mod, BaseRing::MMod)
                | (BaseRing::M, BaseRing::MMod)
        );
        let eq_ok = match (self.equivariant, to.equivariant) {
            (None, None) => true,
            // classes with trivial action
            (None, Some(_)) => true,
            (Some(m), Some(n)) => n % m == 0,
            (Some(_), None) => false,
        };
        base_ok && eq_ok
    }
}

impl fmt::Display for RingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            BaseRing::K0 => "K0",
            BaseRing::K0Mod => "K0_mod",
            BaseRing::M => "M",
            BaseRing::MMod => "M_mod",
        };
        write!(f, "{base}")?;
        if let Some(m) = self.equivariant {
            write!(f, "_eq({m})")?;
        }
        if self.residue {
            write!(f, "/L")?;
        }
        Ok(())
    }
}

impl FromStr for RingTag {
    type Err = MclassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MclassError::Parse(format!("unknown ring tag {s:?}"));
        let (body, residue) = match s.strip_suffix("/L") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (base_str, eq) = match body.find("_eq(") {
            Some(i) => {
                let inner = body[i + 4..].strip_suffix(')').ok_or_else(bad)?;
                let m: u32 = inner.parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                (&body[..i], Some(m))
            }
            None => (body, None),
        };
        let base = match base_str {
            "K0" => BaseRing::K0,
            "K0_mod" => BaseRing::K0Mod,
            "M" => BaseRing::M,
            "M_mod" => BaseRing::MMod,
            _ => return Err(bad()),
        };
        if eq.is_some() && matches!(base, BaseRing::K0Mod | BaseRing::MMod) {
            return Err(bad());
        }
        Ok(RingTag { base, equivariant: eq, residue })
    }
}

/// Commutative monomial in stratum symbols; ordered lexicographically by
/// (name, power) pairs, so the empty monomial (the point class) comes first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn symbol(name: &str) -> Self {
        Monomial(BTreeMap::from([(name.to_string(), 1)]))
    }

    pub fn from_powers<I: IntoIterator<Item = (String, u32)>>(it: I) -> Self {
        let mut m = BTreeMap::new();
        for (s, e) in it {
            if e > 0 {
                *m.entry(s).or_insert(0) += e;
            }
        }
        Monomial(m)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (s, e) in &other.0 {
            *m.entry(s.clone()).or_insert(0) += e;
        }
        Monomial(m)
    }

    pub fn powers(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(s, &e)| (s.as_str(), e))
    }

    pub fn power(&self, name: &str) -> u32 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn without(&self, name: &str) -> Monomial {
        let mut m = self.0.clone();
        m.remove(name);
        Monomial(m)
    }

    /// Splits into the part whose symbols satisfy `pred` and the rest.
    pub fn split(&self, pred: impl Fn(&str) -> bool) -> (Monomial, Monomial) {
        let (a, b): (BTreeMap<_, _>, BTreeMap<_, _>) = self.0.iter().map(|(s, &e)| (s.clone(), e)).partition(|(s, _)| pred(s));
        (Monomial(a), Monomial(b))
    }

    /// Symbol names repeated according to their powers.
    pub fn expanded(&self) -> Vec<String> {
        self.0.iter().flat_map(|(s, &e)| std::iter::repeat(s.clone()).take(e as usize)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (s, &e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "[{s}]")?;
            } else {
                write!(f, "[{s}]^{e}")?;
            }
        }
        Ok(())
    }
}

/// An element of one of the rings named by [`RingTag`], in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MotivicClass<C> {
    tag: RingTag,
    body: BTreeMap<Monomial, LefschetzPoly<C>>,
}

impl<C: Coefficient> MotivicClass<C> {
    pub fn zero(tag: RingTag) -> Self {
        MotivicClass { tag, body: BTreeMap::new() }
    }

    pub fn one(tag: RingTag) -> Self {
        Self::constant(tag, C::one())
    }

    pub fn constant(tag: RingTag, c: C) -> Self {
        Self::from_poly(tag, LefschetzPoly::constant(c)).expect("constants are valid in every ring")
    }

    pub fn lefschetz(tag: RingTag) -> Self {
        Self::from_poly(tag, LefschetzPoly::lefschetz()).expect("L is valid in every ring")
    }

    /// L^e; negative e requires a localized tag.
    pub fn lefschetz_pow(tag: RingTag, e: i32) -> Result<Self, MclassError> {
        Self::from_poly(tag, LefschetzPoly::monomial(e, C::one()))
    }

    pub fn from_poly(tag: RingTag, poly: LefschetzPoly<C>) -> Result<Self, MclassError> {
        Self::from_terms(tag, [(Monomial::unit(), poly)])
    }

    pub fn symbol(tag: RingTag, name: &str) -> Self {
        Self::from_terms(tag, [(Monomial::symbol(name), LefschetzPoly::one())]).expect("symbols are valid")
    }

    /// The class of projective n-space, 1 + L + ... + L^n.
    pub fn projective_space(tag: RingTag, n: u32) -> Self {
        Self::from_poly(tag, LefschetzPoly::projective_space(n)).expect("nonnegative exponents")
    }

    /// Builds a class, merging repeated monomials and enforcing the exponent
    /// rules of `tag`.
    pub fn from_terms<I>(tag: RingTag, terms: I) -> Result<Self, MclassError>
    where
        I: IntoIterator<Item = (Monomial, LefschetzPoly<C>)>,
    {
        let mut out = Self::zero(tag);
        for (m, p) in terms {
            out.add_term(m, &p);
        }
        out.check_exponents()?;
        out.normalize_residue();
        Ok(out)
    }

    fn add_term(&mut self, m: Monomial, p: &LefschetzPoly<C>) {
        if p.is_zero() {
            return;
        }
        let entry = self.body.entry(m.clone()).or_default();
        *entry = entry.add(p);
        if entry.is_zero() {
            self.body.remove(&m);
        }
    }

    fn check_exponents(&self) -> Result<(), MclassError> {
        if self.tag.is_localized() && !self.tag.is_residue() {
            return Ok(());
        }
        for p in self.body.values() {
            if let Some(e) = p.min_exponent() {
                if e < 0 {
                    return Err(if self.tag.is_residue() {
                        MclassError::NegativeExponent(p.to_string())
                    } else {
                        MclassError::NotLocalized(e)
                    });
                }
            }
        }
        Ok(())
    }

    /// Residues keep only the L^0 part of each coefficient.
    fn normalize_residue(&mut self) {
        if !self.tag.is_residue() {
            return;
        }
        let body = std::mem::take(&mut self.body);
        for (m, p) in body {
            let c = p.constant_term();
            if !c.is_zero() {
                self.body.insert(m, LefschetzPoly::constant(c));
            }
        }
    }

    pub fn tag(&self) -> RingTag {
        self.tag
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_empty()
    }

    /// Terms in monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LefschetzPoly<C>)> {
        self.body.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> LefschetzPoly<C> {
        self.body.get(m).cloned().unwrap_or_default()
    }

    /// All symbols occurring, sorted.
    pub fn symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = self.body.keys().flat_map(|m| m.powers().map(|(s, _)| s.to_string())).collect();
        out.sort();
        out.dedup();
        out
    }

    /// The coefficient of the point class when no symbols occur.
    pub fn as_poly(&self) -> Option<LefschetzPoly<C>> {
        match self.body.len() {
            0 => Some(LefschetzPoly::zero()),
            1 => self.body.get(&Monomial::unit()).cloned(),
            _ => None,
        }
    }

    fn same_tag(&self, other: &Self) -> Result<(), MclassError> {
        if self.tag != other.tag {
            return Err(MclassError::TagMismatch(self.tag, other.tag));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MclassError> {
        self.same_tag(other)?;
        let mut out = self.clone();
        for (m, p) in &other.body {
            out.add_term(m.clone(), p);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        MotivicClass { tag: self.tag, body: self.body.iter().map(|(m, p)| (m.clone(), p.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MclassError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MclassError> {
        self.same_tag(other)?;
        let mut out = Self::zero(self.tag);
        for (m1, p1) in &self.body {
            for (m2, p2) in &other.body {
                out.add_term(m1.mul(m2), &p1.mul(p2));
            }
        }
        out.normalize_residue();
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.tag);
        for (m, p) in &self.body {
            out.add_term(m.clone(), &p.scale(c));
        }
        out
    }

    /// Multiplication by a polynomial in L.
    pub fn mul_poly(&self, q: &LefschetzPoly<C>) -> Result<Self, MclassError> {
        let mut out = Self::zero(self.tag);
        for (m, p) in &self.body {
            out.add_term(m.clone(), &p.mul(q));
        }
        out.check_exponents()?;
        out.normalize_residue();
        Ok(out)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        let mut out = Self::zero(self.tag);
        for (m1, p) in &self.body {
            out.add_term(m1.mul(m), p);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.tag);
        for _ in 0..n {
            acc = acc.mul(self).expect("same tag");
        }
        acc
    }

    /// Re-tags the class along an allowed ring map.
    pub fn coerce(&self, to: RingTag) -> Result<Self, MclassError> {
        if !self.tag.coerces_to(to) {
            return Err(MclassError::IllegalCoercion(self.tag, to));
        }
        Ok(MotivicClass { tag: to, body: self.body.clone() })
    }

    /// Substitutes L := 0. Requires every exponent to be nonnegative.
    pub fn mod_l(&self) -> Result<Self, MclassError> {
        if self.tag.is_residue() {
            return Ok(self.clone());
        }
        if self.body.values().any(|p| p.min_exponent().is_some_and(|e| e < 0)) {
            return Err(MclassError::NegativeExponent(self.to_string()));
        }
        let mut out = MotivicClass { tag: self.tag.residue(), body: self.body.clone() };
        out.normalize_residue();
        Ok(out)
    }

    /// Replaces every occurrence of `name` by `image` (coerced to this tag).
    pub fn substitute(&self, name: &str, image: &Self) -> Result<Self, MclassError> {
        let image = image.coerce(self.tag)?;
        let mut out = Self::zero(self.tag);
        for (m, p) in &self.body {
            let e = m.power(name);
            let rest = MotivicClass::from_terms(self.tag, [(m.without(name), p.clone())])?;
            let term = if e == 0 { rest } else { rest.mul(&image.pow(e))? };
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Renames symbol `from` to `to`.
    pub fn rename(&self, from: &str, to: &str) -> Self {
        let mut out = Self::zero(self.tag);
        for (m, p) in &self.body {
            let e = m.power(from);
            let m2 = if e == 0 { m.clone() } else { m.without(from).mul(&Monomial::from_powers([(to.to_string(), e)])) };
            out.add_term(m2, p);
        }
        out
    }
}

impl<C: Coefficient> fmt::Display for MotivicClass<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, p)) in self.body.iter().enumerate() {
            // A single-term coefficient is written inline with its sign.
            let single = p.num_terms() == 1;
            let (e, c) = p.terms().next().expect("nonzero");
            let neg = single && c.is_negative();
            if i > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let coeff_str = if single {
                LefschetzPoly::monomial(e, c.abs()).to_string()
            } else {
                format!("({p})")
            };
            if m.is_unit() {
                write!(f, "{coeff_str}")?;
            } else if single && e == 0 && c.abs().is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{coeff_str}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Cl = MotivicClass<BigInt>;

    fn l() -> Cl {
        Cl::lefschetz(RingTag::K0)
    }
    fn one() -> Cl {
        Cl::one(RingTag::K0)
    }

    #[test]
    fn additive_examples() {
        let c = Cl::symbol(RingTag::K0, "E");
        assert_eq!(Cl::zero(RingTag::K0).add(&c).unwrap(), c);
        assert!(l().add(&l().neg()).unwrap().is_zero());
        assert_eq!(l().sub(&one()).unwrap().add(&one()).unwrap(), l());
    }

    #[test]
    fn multiplicative_examples() {
        let l2 = l().mul(&l()).unwrap();
        assert_eq!(l2, Cl::lefschetz_pow(RingTag::K0, 2).unwrap());
        let a = one().sub(&l()).unwrap().mul(&one().add(&l()).unwrap()).unwrap();
        assert_eq!(a, one().sub(&l2).unwrap());
        let e = Cl::symbol(RingTag::K0, "E");
        assert_eq!(e.mul(&one()).unwrap(), e);
    }

    #[test]
    fn tag_mismatch() {
        let a = Cl::one(RingTag::K0);
        let b = Cl::one(RingTag::M);
        assert_eq!(a.add(&b), Err(MclassError::TagMismatch(RingTag::K0, RingTag::M)));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn negative_powers_need_localization() {
        assert_eq!(Cl::lefschetz_pow(RingTag::K0, -1), Err(MclassError::NotLocalized(-1)));
        assert!(Cl::lefschetz_pow(RingTag::M, -1).is_ok());
    }

    #[test]
    fn mod_l_examples() {
        let p3 = Cl::projective_space(RingTag::K0, 3);
        assert_eq!(p3.mod_l().unwrap(), Cl::one(RingTag::K0.residue()));
        let two_l_minus_one = l().scale(&BigInt::from(2)).sub(&one()).unwrap();
        assert_eq!(two_l_minus_one.mod_l().unwrap(), Cl::constant(RingTag::K0.residue(), BigInt::from(-1)));
        let linv = Cl::lefschetz_pow(RingTag::M, -1).unwrap();
        assert!(matches!(linv.mod_l(), Err(MclassError::NegativeExponent(_))));
    }

    #[test]
    fn coercions() {
        let a = l();
        assert_eq!(a.coerce(RingTag::K0_MOD).unwrap().tag(), RingTag::K0_MOD);
        assert!(a.coerce(RingTag::K0_MOD).unwrap().coerce(RingTag::M_MOD).is_ok());
        assert!(a.coerce(RingTag::M).is_ok());
        assert!(a.coerce(RingTag::M).unwrap().coerce(RingTag::K0).is_err());
        assert!(a.coerce(RingTag::K0_MOD).unwrap().coerce(RingTag::K0).is_err());
        let e = Cl::symbol(RingTag::k0_eq(2), "G");
        assert!(e.coerce(RingTag::k0_eq(4)).is_ok());
        assert!(e.coerce(RingTag::m_eq(2)).is_ok());
        assert!(e.coerce(RingTag::k0_eq(3)).is_err());
        assert!(e.coerce(RingTag::K0).is_err());
    }

    #[test]
    fn tag_strings_roundtrip() {
        for s in ["K0", "K0_mod", "M", "M_mod", "K0_eq(2)", "M_eq(6)", "K0/L", "M_eq(3)/L"] {
            assert_eq!(s.parse::<RingTag>().unwrap().to_string(), s);
        }
        assert!("K0_mod_eq(2)".parse::<RingTag>().is_err());
        assert!("K1".parse::<RingTag>().is_err());
    }

    #[test]
    fn display_is_readable() {
        let e = Cl::symbol(RingTag::K0, "E");
        let c = e.mul_poly(&LefschetzPoly::one_minus_l_pow(1)).unwrap().add(&l()).unwrap();
        assert_eq!(c.to_string(), "L + (-L + 1)*[E]");
        let d = l().scale(&BigInt::from(2)).sub(&one()).unwrap().sub(&e).unwrap();
        assert_eq!(d.to_string(), "(2*L - 1) - [E]");
    }

    #[test]
    fn substitution() {
        let a1 = Cl::symbol(RingTag::K0, "A1").pow(2);
        let out = a1.substitute("A1", &l()).unwrap();
        assert_eq!(out, l().pow(2));
    }
}
