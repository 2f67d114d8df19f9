//! Finite fields and towers F_p ⊂ F_{p^{d_1}} ⊂ ... ⊂ F_{p^{d_s}}.
//!
//! Every level is stored in absolute form F_p[t]/(f) where `f` is the first
//! monic irreducible polynomial of the level's degree in the order used by
//! [`fp_poly::first_irreducible`]. The embedding of a level into the next one
//! sends `t` to the smallest root (in element order) of the lower modulus, and
//! embeddings between distant levels are composites of consecutive ones, so the
//! embeddings of a tower commute by construction.
//!
//! Elements carry the index of their level. The checked entry points on
//! [`FieldTower`] return [`GfError::LevelMismatch`]; the [`Fq`] view used by
//! the algorithms panics instead, because a mismatch there is a programming error.

mod fp_poly;
pub mod linalg;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linalg::FpMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element of level {0} used where level {1} was expected")]
    LevelMismatch(usize, usize),
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("characteristic {p} exceeds the configured bound {max}")]
    CharacteristicTooLarge { p: u32, max: u32 },
    #[error("absolute degree {degree} exceeds the configured bound {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("degree {lower} does not divide degree {upper}")]
    NotASubfield { lower: usize, upper: usize },
    #[error("modulus of level {0} is not irreducible of the declared degree")]
    ReducibleModulus(usize),
    #[error("order {m} is divisible by the characteristic {p}")]
    WildOrder { m: u64, p: u32 },
    #[error("no Artin-Schreier extension: relative degree {degree} differs from the characteristic {p}")]
    NoSuchExtension { degree: usize, p: u32 },
    #[error("tower has no level {0}")]
    NoSuchLevel(usize),
    #[error("element is not defined over the requested subfield")]
    NotInSubfield,
    #[error("malformed element: {0}")]
    BadElement(String),
}

/// Bounds on the towers that may be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLimits {
    pub max_characteristic: u32,
    pub max_degree: usize,
}

impl Default for TowerLimits {
    fn default() -> Self {
        TowerLimits { max_characteristic: 13, max_degree: 64 }
    }
}

#[derive(Debug, Clone)]
struct Level {
    degree: usize,
    modulus: Vec<u32>,
    /// Column i holds the coordinates of (t^i)^p.
    frob: FpMatrix,
    /// Coordinates in the next level of t^j, as columns.
    up: Option<FpMatrix>,
}

/// A chain of finite fields with fixed moduli and embeddings.
#[derive(Debug, Clone)]
pub struct FieldTower {
    p: u32,
    limits: TowerLimits,
    levels: Vec<Level>,
}

/// Serialized form: `{"p":5,"degrees":[1,2],"moduli":[[0,1],[2,4,1]]}` with
/// moduli listed from the constant coefficient up to the leading 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDescription {
    pub p: u32,
    pub degrees: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<Vec<Vec<u32>>>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    level: usize,
    coords: Vec<u32>,
}

impl FieldElement {
    pub fn level(&self) -> usize {
        self.level
    }
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// Elements compare by level, then by the integer Σ c_i p^i.
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.coords.iter().rev().cmp(other.coords.iter().rev()))
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "{c}t")?,
                (_, 1) => write!(f, "t^{i}")?,
                _ => write!(f, "{c}t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self, self.level)
    }
}

/// `a ↦ a^{|base|^exponent}` with the exponent taken modulo `modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrobeniusPower {
    pub exponent: u32,
    pub modulus: u32,
}

impl FrobeniusPower {
    pub fn new(exponent: u32, modulus: u32) -> Self {
        assert!(modulus > 0);
        FrobeniusPower { exponent: exponent % modulus, modulus }
    }
    pub fn identity(modulus: u32) -> Self {
        Self::new(0, modulus)
    }
    pub fn compose(self, other: FrobeniusPower) -> Self {
        assert_eq!(self.modulus, other.modulus);
        Self::new(self.exponent + other.exponent, self.modulus)
    }
    pub fn is_identity(self) -> bool {
        self.exponent == 0
    }
}

/// Result of [`FieldTower::artin_schreier_generator`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtinSchreier {
    pub omega: FieldElement,
    /// Generator of Gal(K/K') as a Frobenius power over K'.
    pub gamma: FrobeniusPower,
    /// ω^p − ω, an element of K'.
    pub companion: FieldElement,
}

impl FieldTower {
    pub fn new(p: u32, degrees: &[usize]) -> Result<Self, GfError> {
        Self::with_limits(p, degrees, TowerLimits::default())
    }

    pub fn with_limits(p: u32, degrees: &[usize], limits: TowerLimits) -> Result<Self, GfError> {
        Self::check_shape(p, degrees, &limits)?;
        let moduli: Vec<Vec<u32>> = degrees.iter().map(|&d| fp_poly::first_irreducible(d, p)).collect();
        Self::assemble(p, degrees, moduli, limits)
    }

    /// Rebuilds a tower from its description, verifying supplied moduli.
    pub fn from_description(desc: &TowerDescription, limits: TowerLimits) -> Result<Self, GfError> {
        match &desc.moduli {
            None => Self::with_limits(desc.p, &desc.degrees, limits),
            Some(moduli) => {
                Self::check_shape(desc.p, &desc.degrees, &limits)?;
                if moduli.len() != desc.degrees.len() {
                    return Err(GfError::BadElement("one modulus per level is required".into()));
                }
                for (i, (m, &d)) in moduli.iter().zip(&desc.degrees).enumerate() {
                    let ok = m.len() == d + 1
                        && m[d] == 1
                        && m.iter().all(|&c| c < desc.p)
                        && fp_poly::is_irreducible(m, desc.p);
                    if !ok {
                        return Err(GfError::ReducibleModulus(i));
                    }
                }
                Self::assemble(desc.p, &desc.degrees, moduli.clone(), limits)
            }
        }
    }

    pub fn description(&self) -> TowerDescription {
        TowerDescription {
            p: self.p,
            degrees: self.levels.iter().map(|l| l.degree).collect(),
            moduli: Some(self.levels.iter().map(|l| l.modulus.clone()).collect()),
        }
    }

    fn check_shape(p: u32, degrees: &[usize], limits: &TowerLimits) -> Result<(), GfError> {
        if !fp_poly::is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if p > limits.max_characteristic || p > 65521 {
            return Err(GfError::CharacteristicTooLarge { p, max: limits.max_characteristic });
        }
        if degrees.is_empty() {
            return Err(GfError::NoSuchLevel(0));
        }
        for &d in degrees {
            if d == 0 || d > limits.max_degree {
                return Err(GfError::DegreeTooLarge { degree: d, max: limits.max_degree });
            }
        }
        for w in degrees.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(GfError::NotASubfield { lower: w[0], upper: w[1] });
            }
        }
        Ok(())
    }

    fn assemble(p: u32, degrees: &[usize], moduli: Vec<Vec<u32>>, limits: TowerLimits) -> Result<Self, GfError> {
        let mut levels: Vec<Level> = degrees
            .iter()
            .zip(moduli)
            .map(|(&degree, modulus)| {
                let frob = frobenius_matrix(p, &modulus);
                Level { degree, modulus, frob, up: None }
            })
            .collect();
        for i in 0..levels.len().saturating_sub(1) {
            let up = {
                let tmp = FieldTower { p, limits, levels: levels.clone() };
                tmp.consecutive_embedding(i)
            };
            levels[i].up = Some(up);
        }
        Ok(FieldTower { p, limits, levels })
    }

    /// Coordinates of t_i^j in level i+1, where t_i ↦ the least root of f_i.
    fn consecutive_embedding(&self, i: usize) -> FpMatrix {
        let upper = self.level(i + 1);
        let low = &self.levels[i];
        let poly: Vec<FieldElement> = low.modulus.iter().map(|&c| upper.from_int(c as i64)).collect();
        let mut roots = upper.roots_of_split_poly(&poly);
        roots.sort();
        let root = roots.into_iter().next().expect("modulus must split in the upper level");
        let mut columns = Vec::with_capacity(low.degree);
        let mut acc = upper.one();
        for _ in 0..low.degree {
            columns.push(acc.coords.clone());
            acc = upper.mul(&acc, &root);
        }
        FpMatrix::from_columns(self.p, upper.degree(), &columns)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn limits(&self) -> TowerLimits {
        self.limits
    }
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }
    pub fn degree(&self, level: usize) -> usize {
        self.levels[level].degree
    }
    pub fn modulus(&self, level: usize) -> &[u32] {
        &self.levels[level].modulus
    }

    /// Unchecked arithmetic view of one level.
    pub fn level(&self, level: usize) -> Fq<'_> {
        assert!(level < self.levels.len(), "no level {level}");
        Fq { tower: self, index: level }
    }

    pub fn checked_level(&self, level: usize) -> Result<Fq<'_>, GfError> {
        if level < self.levels.len() {
            Ok(self.level(level))
        } else {
            Err(GfError::NoSuchLevel(level))
        }
    }

    /// Tower truncated after `top` with one additional level of absolute degree `degree`.
    pub fn extended(&self, top: usize, degree: usize) -> Result<FieldTower, GfError> {
        let mut degrees: Vec<usize> = self.levels[..=top].iter().map(|l| l.degree).collect();
        Self::check_shape(self.p, &[degrees[top], degree], &self.limits)?;
        let mut moduli: Vec<Vec<u32>> = self.levels[..=top].iter().map(|l| l.modulus.clone()).collect();
        degrees.push(degree);
        moduli.push(fp_poly::first_irreducible(degree, self.p));
        Self::assemble(self.p, &degrees, moduli, self.limits)
    }

    pub fn element(&self, level: usize, coords: Vec<u32>) -> Result<FieldElement, GfError> {
        let l = self.checked_level(level)?;
        if coords.len() > l.degree() {
            return Err(GfError::BadElement(format!(
                "{} coordinates for a level of degree {}",
                coords.len(),
                l.degree()
            )));
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.p) {
            return Err(GfError::BadElement(format!("coordinate {c} not reduced mod {}", self.p)));
        }
        let mut coords = coords;
        coords.resize(l.degree(), 0);
        Ok(FieldElement { level, coords })
    }

    fn same_level(&self, a: &FieldElement, b: &FieldElement) -> Result<usize, GfError> {
        if a.level != b.level {
            return Err(GfError::LevelMismatch(b.level, a.level));
        }
        if a.level >= self.levels.len() {
            return Err(GfError::NoSuchLevel(a.level));
        }
        Ok(a.level)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        let l = self.same_level(a, b)?;
        Ok(self.level(l).add(a, b))
    }
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        let l = self.same_level(a, b)?;
        Ok(self.level(l).sub(a, b))
    }
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        let l = self.same_level(a, b)?;
        Ok(self.level(l).mul(a, b))
    }
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        self.checked_level(a.level)?.inv(a).ok_or(GfError::DivisionByZero)
    }
    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        let l = self.same_level(a, b)?;
        let f = self.level(l);
        let inv = f.inv(b).ok_or(GfError::DivisionByZero)?;
        Ok(f.mul(a, &inv))
    }

    /// `a ↦ a^{|base|^power.exponent}`.
    pub fn frobenius(&self, a: &FieldElement, base: usize, power: FrobeniusPower) -> Result<FieldElement, GfError> {
        let f = self.checked_level(a.level)?;
        let e = self.checked_level(base)?.degree();
        if f.degree() % e != 0 {
            return Err(GfError::NotASubfield { lower: e, upper: f.degree() });
        }
        Ok(f.frob(a, e * power.exponent as usize))
    }

    /// Matrix of the F_p-linear embedding of level `from` into level `to`.
    pub fn embedding_matrix(&self, from: usize, to: usize) -> FpMatrix {
        assert!(from <= to && to < self.levels.len());
        let mut m = FpMatrix::identity(self.p, self.levels[from].degree);
        for i in from..to {
            m = self.levels[i].up.as_ref().expect("embedding").mul(&m);
        }
        m
    }

    pub fn embed(&self, a: &FieldElement, to: usize) -> Result<FieldElement, GfError> {
        if to >= self.levels.len() {
            return Err(GfError::NoSuchLevel(to));
        }
        if to < a.level {
            return Err(GfError::LevelMismatch(a.level, to));
        }
        let m = self.embedding_matrix(a.level, to);
        Ok(FieldElement { level: to, coords: m.apply(&a.coords) })
    }

    /// Inverse of [`embed`](Self::embed) on its image.
    pub fn restrict(&self, a: &FieldElement, to: usize) -> Result<FieldElement, GfError> {
        if to > a.level {
            return Err(GfError::LevelMismatch(a.level, to));
        }
        let m = self.embedding_matrix(to, a.level);
        let x = m.solve(&a.coords).ok_or(GfError::NotInSubfield)?;
        Ok(FieldElement { level: to, coords: x })
    }

    /// Whether `m` divides |level| − 1; if so, the least element (in element
    /// order) of the form a^{(|level|−1)/m} having exact order m.
    pub fn roots_of_unity_present(&self, m: u64, level: usize) -> Result<Option<FieldElement>, GfError> {
        let f = self.checked_level(level)?;
        if m == 0 {
            return Err(GfError::BadElement("order 0".into()));
        }
        if m % self.p as u64 == 0 {
            return Err(GfError::WildOrder { m, p: self.p });
        }
        let size = f.size();
        let minus_one = &size - BigUint::one();
        if (&minus_one % m) != BigUint::zero() {
            return Ok(None);
        }
        let e = minus_one / m;
        let primes = prime_factors(m);
        let one = f.one();
        let mut idx: u128 = 1;
        loop {
            let a = f.from_index(idx);
            let z = f.pow_big(&a, &e);
            if primes.iter().all(|&r| f.pow(&z, m / r) != one) {
                return Ok(Some(z));
            }
            idx += 1;
        }
    }

    /// Artin–Schreier generator of level `level` over its subfield of absolute
    /// degree `sub_degree`.
    pub fn artin_schreier_generator(&self, level: usize, sub_degree: usize) -> Result<ArtinSchreier, GfError> {
        let f = self.checked_level(level)?;
        f.artin_schreier(f.degree(), sub_degree)
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn frobenius_matrix(p: u32, modulus: &[u32]) -> FpMatrix {
    let n = modulus.len() - 1;
    let x = vec![0, 1];
    let xp = fp_poly::pow_mod_poly(&x, p as u64, modulus, p);
    let mut columns = Vec::with_capacity(n);
    let mut acc = fp_poly::rem(&[1], modulus, p);
    for _ in 0..n {
        let mut c = acc.clone();
        c.resize(n, 0);
        columns.push(c);
        acc = fp_poly::rem(&fp_poly::mul(&acc, &xp, p), modulus, p);
    }
    FpMatrix::from_columns(p, n, &columns)
}

/// Arithmetic inside one level of a tower.
#[derive(Clone, Copy)]
pub struct Fq<'a> {
    tower: &'a FieldTower,
    index: usize,
}

impl fmt::Debug for Fq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (level {})", self.p(), self.degree(), self.index)
    }
}

impl<'a> Fq<'a> {
    pub fn tower(&self) -> &'a FieldTower {
        self.tower
    }
    pub fn index(&self) -> usize {
        self.index
    }
    pub fn p(&self) -> u32 {
        self.tower.p
    }
    pub fn degree(&self) -> usize {
        self.tower.levels[self.index].degree
    }
    pub fn size(&self) -> BigUint {
        BigUint::from(self.p()).pow(self.degree() as u32)
    }
    /// Size as a machine integer when it fits.
    pub fn size_u128(&self) -> Option<u128> {
        (self.p() as u128).checked_pow(self.degree() as u32)
    }
    fn modulus(&self) -> &'a [u32] {
        &self.tower.levels[self.index].modulus
    }
    pub fn frobenius_matrix(&self) -> &'a FpMatrix {
        &self.tower.levels[self.index].frob
    }

    #[inline]
    fn check(&self, a: &FieldElement) {
        assert_eq!(a.level, self.index, "element of level {} used in level {}", a.level, self.index);
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { level: self.index, coords: vec![0; self.degree()] }
    }
    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }
    pub fn from_int(&self, v: i64) -> FieldElement {
        let mut z = self.zero();
        z.coords[0] = v.rem_euclid(self.p() as i64) as u32;
        z
    }
    /// The class of t.
    pub fn generator(&self) -> FieldElement {
        if self.degree() == 1 {
            let m = self.modulus();
            return self.from_int(-(m[0] as i64));
        }
        let mut z = self.zero();
        z.coords[1] = 1;
        z
    }
    pub fn from_coords(&self, coords: &[u32]) -> FieldElement {
        assert_eq!(coords.len(), self.degree());
        FieldElement { level: self.index, coords: coords.iter().map(|c| c % self.p()).collect() }
    }
    /// Element whose coordinates are the base-p digits of `idx`.
    pub fn from_index(&self, mut idx: u128) -> FieldElement {
        let p = self.p() as u128;
        let mut z = self.zero();
        for c in z.coords.iter_mut() {
            *c = (idx % p) as u32;
            idx /= p;
        }
        z
    }
    pub fn index_of(&self, a: &FieldElement) -> u128 {
        self.check(a);
        a.coords.iter().rev().fold(0u128, |acc, &c| acc * self.p() as u128 + c as u128)
    }
    /// All elements in element order. Only sensible for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let n = self.size_u128().expect("field too large to enumerate");
        (0..n).map(move |i| self.from_index(i))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let p = self.p();
        FieldElement { level: self.index, coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| (x + y) % p).collect() }
    }
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let p = self.p();
        FieldElement { level: self.index, coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| (x + p - y) % p).collect() }
    }
    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.check(a);
        let p = self.p();
        FieldElement { level: self.index, coords: a.coords.iter().map(|&x| (p - x) % p).collect() }
    }
    /// Multiplication by an integer.
    pub fn scale(&self, a: &FieldElement, c: i64) -> FieldElement {
        self.check(a);
        let p = self.p() as u64;
        let c = c.rem_euclid(p as i64) as u64;
        FieldElement { level: self.index, coords: a.coords.iter().map(|&x| (x as u64 * c % p) as u32).collect() }
    }
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let n = self.degree();
        if n == 1 {
            let p = self.p() as u64;
            return FieldElement { level: self.index, coords: vec![(a.coords[0] as u64 * b.coords[0] as u64 % p) as u32] };
        }
        let p = self.p() as u64;
        let mut acc = vec![0u64; 2 * n - 1];
        for (i, &x) in a.coords.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coords.iter().enumerate() {
                acc[i + j] += x as u64 * y as u64;
            }
            if i % 64 == 63 {
                acc.iter_mut().for_each(|v| *v %= p);
            }
        }
        let m = self.modulus();
        for k in (n..2 * n - 1).rev() {
            let c = acc[k] % p;
            acc[k] = 0;
            if c == 0 {
                continue;
            }
            // t^k = t^{k-n} * t^n = -t^{k-n} * Σ_{i<n} m_i t^i
            for i in 0..n {
                acc[k - n + i] = (acc[k - n + i] + (p - m[i] as u64) * c) % p;
            }
        }
        FieldElement { level: self.index, coords: acc[..n].iter().map(|&v| (v % p) as u32).collect() }
    }
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        self.check(a);
        if a.is_zero() {
            return None;
        }
        let mut v = a.coords.clone();
        fp_poly::trim(&mut v);
        let inv = fp_poly::inv_modulo(&v, self.modulus(), self.p())?;
        let mut coords = inv;
        coords.resize(self.degree(), 0);
        Some(FieldElement { level: self.index, coords })
    }
    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Option<FieldElement> {
        Some(self.mul(a, &self.inv(b)?))
    }
    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
    pub fn pow_big(&self, a: &FieldElement, e: &BigUint) -> FieldElement {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
    /// Integer power with sign (negative powers invert).
    pub fn powi(&self, a: &FieldElement, e: i64) -> Option<FieldElement> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            Some(self.pow(&self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// `a ↦ a^{p^s}`.
    pub fn frob(&self, a: &FieldElement, s: usize) -> FieldElement {
        self.check(a);
        let s = s % self.degree();
        let m = self.frobenius_matrix();
        let mut c = a.coords.clone();
        for _ in 0..s {
            c = m.apply(&c);
        }
        FieldElement { level: self.index, coords: c }
    }

    /// Matrix of `a ↦ a^{p^s}` as an F_p-linear map.
    pub fn frob_matrix_power(&self, s: usize) -> FpMatrix {
        self.frobenius_matrix().pow((s % self.degree()) as u64)
    }

    /// Matrix of multiplication by `a`.
    pub fn mul_matrix(&self, a: &FieldElement) -> FpMatrix {
        let n = self.degree();
        let columns: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut e = self.zero();
                e.coords[i] = 1;
                self.mul(a, &e).coords
            })
            .collect();
        FpMatrix::from_columns(self.p(), n, &columns)
    }

    pub fn apply_matrix(&self, m: &FpMatrix, a: &FieldElement) -> FieldElement {
        self.check(a);
        FieldElement { level: self.index, coords: m.apply(&a.coords) }
    }

    /// F_p-basis of the subfield of absolute degree `sub_degree`.
    pub fn subfield(&self, sub_degree: usize) -> Result<Subfield<'a>, GfError> {
        if sub_degree == 0 || self.degree() % sub_degree != 0 {
            return Err(GfError::NotASubfield { lower: sub_degree, upper: self.degree() });
        }
        let n = self.degree();
        let fixed = self.frob_matrix_power(sub_degree).sub(&FpMatrix::identity(self.p(), n));
        let basis: Vec<FieldElement> = fixed.kernel().into_iter().map(|c| self.from_coords(&c)).collect();
        debug_assert_eq!(basis.len(), sub_degree);
        let basis_matrix = FpMatrix::from_columns(self.p(), n, &basis.iter().map(|b| b.coords.clone()).collect::<Vec<_>>());
        Ok(Subfield { field: *self, degree: sub_degree, basis, basis_matrix })
    }

    pub fn in_subfield(&self, a: &FieldElement, sub_degree: usize) -> bool {
        self.frob(a, sub_degree) == *a
    }

    /// Artin–Schreier generator for the subfield of absolute degree `big` over
    /// its subfield of absolute degree `small`, both inside this level.
    pub fn artin_schreier(&self, big: usize, small: usize) -> Result<ArtinSchreier, GfError> {
        let p = self.p() as usize;
        if small == 0 || big % small != 0 {
            return Err(GfError::NotASubfield { lower: small, upper: big });
        }
        if big / small != p {
            return Err(GfError::NoSuchExtension { degree: big / small, p: self.p() });
        }
        let sub = self.subfield(big)?;
        let columns: Vec<Vec<u32>> = sub
            .basis
            .iter()
            .map(|b| self.sub(&self.frob(b, small), b).coords)
            .collect();
        let m = FpMatrix::from_columns(self.p(), self.degree(), &columns);
        let x = m.solve(&self.one().coords).expect("trace of 1 vanishes in an extension of degree p");
        let omega = sub.element(&x);
        let companion = self.sub(&self.pow(&omega, p as u64), &omega);
        Ok(ArtinSchreier { omega, gamma: FrobeniusPower::new(1, (big / small) as u32), companion })
    }

    /// Roots of a monic polynomial over this level that splits into distinct
    /// linear factors here (Berlekamp's trace algorithm).
    pub fn roots_of_split_poly(&self, poly: &[FieldElement]) -> Vec<FieldElement> {
        let mut h = poly.to_vec();
        self.ptrim(&mut h);
        let h = self.pmonic(h);
        let n = self.degree();
        let p = self.p() as u64;
        let mut factors = vec![h];
        for b in 0..n {
            if factors.iter().all(|f| f.len() <= 2) {
                break;
            }
            let mut beta = self.zero();
            beta.coords[b] = 1;
            let mut next = Vec::new();
            for g in factors {
                if g.len() <= 2 {
                    next.push(g);
                    continue;
                }
                // T = Σ_{i<n} (βx)^{p^i} mod g
                let mut u = self.prem(&[self.zero(), beta.clone()], &g);
                let mut tr = u.clone();
                for _ in 1..n {
                    u = self.ppowmod(&u, p, &g);
                    tr = self.padd(&tr, &u);
                }
                for c in 0..self.p() {
                    let mut shifted = tr.clone();
                    if shifted.is_empty() {
                        shifted.push(self.zero());
                    }
                    shifted[0] = self.sub(&shifted[0], &self.from_int(c as i64));
                    self.ptrim(&mut shifted);
                    let d = self.pgcd(&g, &shifted);
                    if d.len() >= 2 {
                        next.push(d);
                    }
                }
            }
            factors = next;
        }
        factors
            .into_iter()
            .filter(|f| f.len() == 2)
            .map(|f| self.neg(&f[0]))
            .collect()
    }

    // polynomial helpers over this level (little-endian, trimmed)
    fn ptrim(&self, a: &mut Vec<FieldElement>) {
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
    }
    fn pmonic(&self, mut a: Vec<FieldElement>) -> Vec<FieldElement> {
        self.ptrim(&mut a);
        if let Some(lead) = a.last().cloned() {
            let inv = self.inv(&lead).expect("nonzero lead");
            for c in a.iter_mut() {
                *c = self.mul(c, &inv);
            }
        }
        a
    }
    fn padd(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        let n = a.len().max(b.len());
        let z = self.zero();
        let mut out: Vec<FieldElement> = (0..n).map(|i| self.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
        self.ptrim(&mut out);
        out
    }
    fn pmul(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        self.ptrim(&mut out);
        out
    }
    fn prem(&self, a: &[FieldElement], m: &[FieldElement]) -> Vec<FieldElement> {
        let mut r = a.to_vec();
        self.ptrim(&mut r);
        let dm = m.len() - 1;
        let inv_lead = self.inv(&m[dm]).expect("nonzero modulus");
        while r.len() > dm {
            let dr = r.len() - 1;
            let f = self.mul(&r[dr], &inv_lead);
            for i in 0..=dm {
                r[dr - dm + i] = self.sub(&r[dr - dm + i], &self.mul(&f, &m[i]));
            }
            self.ptrim(&mut r);
        }
        r
    }
    fn ppowmod(&self, a: &[FieldElement], mut e: u64, m: &[FieldElement]) -> Vec<FieldElement> {
        let mut acc = self.prem(&[self.one()], m);
        let mut b = self.prem(a, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.prem(&self.pmul(&acc, &b), m);
            }
            e >>= 1;
            if e > 0 {
                b = self.prem(&self.pmul(&b, &b), m);
            }
        }
        acc
    }
    fn pgcd(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        self.ptrim(&mut x);
        self.ptrim(&mut y);
        while !y.is_empty() {
            let r = self.prem(&x, &y);
            x = y;
            y = r;
        }
        self.pmonic(x)
    }
}

/// A subfield of a level, given by an F_p-basis of elements of the level.
#[derive(Clone, Debug)]
pub struct Subfield<'a> {
    field: Fq<'a>,
    degree: usize,
    basis: Vec<FieldElement>,
    basis_matrix: FpMatrix,
}

impl<'a> Subfield<'a> {
    pub fn ambient(&self) -> Fq<'a> {
        self.field
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }
    /// Matrix whose columns are the basis elements (ambient coordinates).
    pub fn basis_matrix(&self) -> &FpMatrix {
        &self.basis_matrix
    }
    pub fn element(&self, coords: &[u32]) -> FieldElement {
        self.field.from_coords(&self.basis_matrix.apply(coords))
    }
    pub fn coordinates(&self, a: &FieldElement) -> Option<Vec<u32>> {
        self.basis_matrix.solve(&a.coords)
    }
    pub fn contains(&self, a: &FieldElement) -> bool {
        self.field.in_subfield(a, self.degree)
    }
    /// Subfield elements in the order of their ambient element order.
    /// Only sensible for small subfields.
    pub fn elements_sorted(&self) -> Vec<FieldElement> {
        let p = self.field.p() as u128;
        let count = p.pow(self.degree as u32);
        let mut out: Vec<FieldElement> = (0..count)
            .map(|mut i| {
                let c: Vec<u32> = (0..self.degree)
                    .map(|_| {
                        let d = (i % p) as u32;
                        i /= p;
                        d
                    })
                    .collect();
                self.element(&c)
            })
            .collect();
        out.sort();
        out
    }
}

/// Number of elements p^n as a u64 when it fits.
pub fn field_size_u64(p: u32, n: usize) -> Option<u64> {
    (p as u64).checked_pow(n as u32)
}

pub fn big_to_u64(x: &BigUint) -> Option<u64> {
    x.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_addition() {
        let t = FieldTower::new(5, &[1]).unwrap();
        let f = t.level(0);
        assert!(f.add(&f.from_int(2), &f.from_int(3)).is_zero());
    }

    #[test]
    fn f4_generator_times_successor_is_one() {
        let t = FieldTower::new(2, &[1, 2]).unwrap();
        assert_eq!(t.modulus(1), &[1, 1, 1]);
        let f = t.level(1);
        let g = f.generator();
        let g1 = f.add(&g, &f.one());
        assert_eq!(f.mul(&g, &g1), f.one());
    }

    #[test]
    fn inverse_of_zero_fails() {
        let t = FieldTower::new(3, &[2]).unwrap();
        assert_eq!(t.inv(&t.level(0).zero()), Err(GfError::DivisionByZero));
    }

    #[test]
    fn level_mismatch_is_reported() {
        let t = FieldTower::new(3, &[1, 2]).unwrap();
        let a = t.level(0).one();
        let b = t.level(1).one();
        assert_eq!(t.add(&a, &b), Err(GfError::LevelMismatch(1, 0)));
    }

    #[test]
    fn frobenius_on_f9_negates_generator() {
        let t = FieldTower::new(3, &[1, 2]).unwrap();
        let f = t.level(1);
        let g = f.generator();
        assert_eq!(f.mul(&g, &g), f.from_int(-1));
        let fg = t.frobenius(&g, 0, FrobeniusPower::new(1, 2)).unwrap();
        assert_eq!(fg, f.neg(&g));
        let ffg = t.frobenius(&fg, 0, FrobeniusPower::new(1, 2)).unwrap();
        assert_eq!(ffg, g);
    }

    #[test]
    fn frobenius_fixes_base() {
        let t = FieldTower::new(2, &[1, 2, 4]).unwrap();
        let k = t.level(1);
        let big = t.level(2);
        for a in k.elements() {
            let e = t.embed(&a, 2).unwrap();
            assert_eq!(big.frob(&e, 2), e);
        }
        let x = big.from_index(11);
        assert_eq!(big.frob(&x, 4), x);
    }

    #[test]
    fn roots_of_unity_examples() {
        let t = FieldTower::new(5, &[1]).unwrap();
        assert_eq!(t.roots_of_unity_present(2, 0).unwrap(), Some(t.level(0).from_int(4)));
        assert_eq!(t.roots_of_unity_present(4, 0).unwrap(), Some(t.level(0).from_int(2)));
        assert_eq!(t.roots_of_unity_present(3, 0).unwrap(), None);
        assert_eq!(t.roots_of_unity_present(5, 0), Err(GfError::WildOrder { m: 5, p: 5 }));
    }

    #[test]
    fn artin_schreier_f4() {
        let t = FieldTower::new(2, &[1, 2]).unwrap();
        let f = t.level(1);
        let a = t.artin_schreier_generator(1, 1).unwrap();
        assert_eq!(a.omega, f.generator());
        assert_eq!(f.frob(&a.omega, 1), f.add(&a.omega, &f.one()));
        assert_eq!(a.companion, f.one());
    }

    #[test]
    fn artin_schreier_wrong_degree() {
        let t = FieldTower::new(3, &[1, 2]).unwrap();
        assert_eq!(t.artin_schreier_generator(1, 1), Err(GfError::NoSuchExtension { degree: 2, p: 3 }));
    }

    #[test]
    fn embeddings_commute() {
        let t = FieldTower::new(2, &[1, 2, 4, 8]).unwrap();
        let direct = t.embedding_matrix(1, 3);
        let composite = t.embedding_matrix(2, 3).mul(&t.embedding_matrix(1, 2));
        assert_eq!(direct, composite);
        // the embedding is a ring map
        let k = t.level(1);
        let big = t.level(3);
        for a in k.elements() {
            for b in k.elements() {
                let ab = t.embed(&k.mul(&a, &b), 3).unwrap();
                assert_eq!(ab, big.mul(&t.embed(&a, 3).unwrap(), &t.embed(&b, 3).unwrap()));
            }
        }
    }

    #[test]
    fn restrict_inverts_embed() {
        let t = FieldTower::new(3, &[2, 4]).unwrap();
        let a = t.level(0).from_index(7);
        let e = t.embed(&a, 1).unwrap();
        assert_eq!(t.restrict(&e, 0).unwrap(), a);
        let g = t.level(1).generator();
        assert_eq!(t.restrict(&g, 0), Err(GfError::NotInSubfield));
    }

    #[test]
    fn subfield_basis_and_membership() {
        let t = FieldTower::new(2, &[4]).unwrap();
        let f = t.level(0);
        let s = f.subfield(2).unwrap();
        let els = s.elements_sorted();
        assert_eq!(els.len(), 4);
        assert!(els.iter().all(|e| s.contains(e)));
        assert_eq!(els.iter().filter(|e| f.in_subfield(e, 1)).count(), 2);
    }

    #[test]
    fn limits_are_enforced() {
        assert!(matches!(FieldTower::new(17, &[1]), Err(GfError::CharacteristicTooLarge { .. })));
        assert!(matches!(FieldTower::new(2, &[65]), Err(GfError::DegreeTooLarge { .. })));
        assert!(matches!(FieldTower::new(4, &[1]), Err(GfError::NotPrime(4))));
        assert!(matches!(FieldTower::new(2, &[2, 3]), Err(GfError::NotASubfield { .. })));
    }

    #[test]
    fn description_roundtrip() {
        let t = FieldTower::new(3, &[1, 2, 6]).unwrap();
        let d = t.description();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.starts_with(r#"{"p":3,"degrees":[1,2,6],"moduli":[[0,1],[1,0,1],"#));
        let back = FieldTower::from_description(&serde_json::from_str(&s).unwrap(), TowerLimits::default()).unwrap();
        assert_eq!(back.description(), d);
        let bad = TowerDescription { p: 2, degrees: vec![2], moduli: Some(vec![vec![1, 0, 1]]) };
        assert_eq!(FieldTower::from_description(&bad, TowerLimits::default()).unwrap_err(), GfError::ReducibleModulus(0));
    }
}
