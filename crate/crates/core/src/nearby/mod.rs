//! Nearby fibers and motivic reductions of SNC models.
//!
//! A model lists the components E_i of the special fiber with their
//! multiplicities N_i and, for every nonempty set I of components, the class
//! of the open stratum E_I^o and of its μ_{m_I}-cover. Classes are inputs;
//! nothing here constructs a resolution.

mod doc;

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::mclass::{
    parse_class, Coefficient, LefschetzPoly, MclassError, MotivicClass, RealizationSpec, RealizationTarget, RingTag, Session,
};
use crate::quotient::{quotient_homomorphism, QuotientError, QuotientRules};

pub use doc::{ActedSymbolDoc, ComponentDoc, ModelDoc, StratumDoc};

/// Largest number of components; the strata lattice has 2^n − 1 entries.
pub const MAX_COMPONENTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NearbyError {
    #[error("invalid model: {0}")]
    ModelInvalid(String),
    #[error("declared total class {declared} differs from the sum of strata {computed}")]
    TotalClassMismatch { declared: String, computed: String },
    #[error("blowup step: {0}")]
    InvalidBlowup(String),
    #[error(transparent)]
    Class(#[from] MclassError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error("model file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub multiplicity: u32,
}

/// A symbol carrying a μ_order-action, with the class of its quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActedSymbol<C> {
    pub name: String,
    pub order: u32,
    pub quotient: MotivicClass<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum<C> {
    /// Sorted component indices.
    pub subset: Vec<usize>,
    /// [E_I^o] in K0.
    pub class: MotivicClass<C>,
    /// [Ẽ_I^o] in K0_eq(m_I).
    pub cover: MotivicClass<C>,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SncModel<C> {
    pub name: String,
    pub note: String,
    pub components: Vec<Component>,
    pub acted: Vec<ActedSymbol<C>>,
    /// Ordered by subset size, then lexicographically.
    pub strata: Vec<Stratum<C>>,
    pub total_class: Option<MotivicClass<C>>,
    /// Class of the generic fiber, for the 1 mod L shadow.
    pub generic_fiber: Option<MotivicClass<C>>,
    /// Classes in L standing in for plain symbols when realizing.
    pub symbol_values: BTreeMap<String, MotivicClass<C>>,
}

/// gcd of the multiplicities indexed by `subset`.
pub fn stratum_gcd(multiplicities: &[u32], subset: &[usize]) -> u32 {
    subset.iter().fold(0u32, |g, &i| g.gcd(&multiplicities[i]))
}

fn subsets_in_order(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (1u32..(1 << n)).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect()).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

impl<C: Coefficient> SncModel<C> {
    pub fn from_doc(doc: &ModelDoc) -> Result<Self, NearbyError> {
        let bad = |s: String| NearbyError::ModelInvalid(s);
        let n = doc.components.len();
        if n == 0 {
            return Err(bad("no components".into()));
        }
        if n > MAX_COMPONENTS {
            return Err(bad(format!("{n} components exceed the limit {MAX_COMPONENTS}")));
        }
        let mut index = BTreeMap::new();
        for (i, c) in doc.components.iter().enumerate() {
            if c.multiplicity == 0 {
                return Err(bad(format!("component {} has multiplicity 0", c.name)));
            }
            if index.insert(c.name.clone(), i).is_some() {
                return Err(bad(format!("component {} listed twice", c.name)));
            }
        }
        let mults: Vec<u32> = doc.components.iter().map(|c| c.multiplicity).collect();

        let mut session = Session::<C>::new();
        let mut acted = Vec::new();
        for a in &doc.acted_symbols {
            if a.order == 0 {
                return Err(bad(format!("acted symbol {} has order 0", a.name)));
            }
            session.declare_acted(&a.name, a.order, "")?;
        }
        for a in &doc.acted_symbols {
            let quotient = parse_plain(&session, &a.quotient, &format!("quotient of {}", a.name))?;
            acted.push(ActedSymbol { name: a.name.clone(), order: a.order, quotient });
        }

        let mut by_subset: BTreeMap<Vec<usize>, Stratum<C>> = BTreeMap::new();
        for s in &doc.strata {
            let mut subset = Vec::with_capacity(s.subset.len());
            for name in &s.subset {
                subset.push(*index.get(name).ok_or_else(|| bad(format!("stratum names unknown component {name}")))?);
            }
            subset.sort_unstable();
            let label = subset_label(&doc.components, &subset);
            if subset.is_empty() || subset.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad(format!("stratum {label} is not a nonempty set of components")));
            }
            let m = stratum_gcd(&mults, &subset);
            if s.m != m {
                return Err(bad(format!("stratum {label} declares m = {} but the gcd of multiplicities is {m}", s.m)));
            }
            let class = parse_plain(&session, &s.class_e, &format!("E{label}"))?;
            let cover = parse_class::<C>(RingTag::k0_eq(m), &s.class_e_cover)
                .map_err(|e| bad(format!("cover of {label}: {e}")))?;
            session.check_class(&cover).map_err(|e| bad(format!("cover of {label}: {e}")))?;
            if by_subset.insert(subset.clone(), Stratum { subset, class, cover, m }).is_some() {
                return Err(bad(format!("stratum {label} declared twice")));
            }
        }
        let mut strata = Vec::new();
        for subset in subsets_in_order(n) {
            let s = by_subset
                .remove(&subset)
                .ok_or_else(|| bad(format!("stratum {} missing; declare empty strata with class 0", subset_label(&doc.components, &subset))))?;
            strata.push(s);
        }
        let total_class = doc.total_class.as_deref().map(|s| parse_plain(&session, s, "total class")).transpose()?;
        let generic_fiber = doc.generic_fiber.as_deref().map(|s| parse_plain(&session, s, "generic fiber")).transpose()?;
        let mut symbol_values = BTreeMap::new();
        for (name, v) in &doc.symbol_values {
            let c: MotivicClass<C> = parse_plain(&session, v, &format!("value of {name}"))?;
            if !c.symbols().is_empty() {
                return Err(bad(format!("value of {name} must be a polynomial in L")));
            }
            symbol_values.insert(name.clone(), c);
        }
        Ok(SncModel {
            name: doc.name.clone(),
            note: doc.note.clone(),
            components: doc.components.iter().map(|c| Component { name: c.name.clone(), multiplicity: c.multiplicity }).collect(),
            acted,
            strata,
            total_class,
            generic_fiber,
            symbol_values,
        })
    }

    pub fn from_json(src: &str) -> Result<Self, NearbyError> {
        let doc: ModelDoc = serde_json::from_str(src).map_err(|e| NearbyError::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn label(&self, s: &Stratum<C>) -> String {
        let names: Vec<&str> = s.subset.iter().map(|&i| self.components[i].name.as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// lcm of the m_I: every cover action factors through μ of this order.
    pub fn cover_order(&self) -> u32 {
        self.strata.iter().fold(1, |l, s| l.lcm(&s.m))
    }

    pub fn quotient_rules(&self) -> QuotientRules<C> {
        self.acted.iter().fold(QuotientRules::new(false), |r, a| r.with_rule(&a.name, a.quotient.clone()))
    }

    /// Strata whose cover does not have the declared stratum as quotient.
    pub fn cover_mismatches(&self) -> Result<Vec<String>, NearbyError> {
        let rules = self.quotient_rules();
        let mut out = Vec::new();
        for s in &self.strata {
            let q = quotient_homomorphism(&s.cover, &rules)?;
            let e = s.class.coerce(q.tag())?;
            if q != e {
                out.push(format!("{}: cover quotient {q} but stratum {e}", self.label(s)));
            }
        }
        Ok(out)
    }
}

fn parse_plain<C: Coefficient>(session: &Session<C>, src: &str, what: &str) -> Result<MotivicClass<C>, NearbyError> {
    let c = parse_class::<C>(RingTag::K0, src).map_err(|e| NearbyError::ModelInvalid(format!("{what}: {e}")))?;
    session.check_class(&c).map_err(|e| NearbyError::ModelInvalid(format!("{what}: {e}")))?;
    Ok(c)
}

fn subset_label(components: &[ComponentDoc], subset: &[usize]) -> String {
    let names: Vec<&str> = subset.iter().map(|&i| components[i].name.as_str()).collect();
    format!("{{{}}}", names.join(","))
}

/// (1 − L)^k
fn one_minus_l_pow<C: Coefficient>(k: usize) -> LefschetzPoly<C> {
    LefschetzPoly::one_minus_l_pow(k as u32)
}

/// S_f = Σ (1−L)^{|I|−1}[Ẽ_I^o] in M_eq(lcm m_I).
pub fn nearby_fiber<C: Coefficient>(m: &SncModel<C>) -> Result<MotivicClass<C>, NearbyError> {
    let tag = RingTag::m_eq(m.cover_order());
    let mut out = MotivicClass::zero(tag);
    for s in &m.strata {
        out = out.add(&s.cover.coerce(tag)?.mul_poly(&one_minus_l_pow(s.subset.len() - 1))?)?;
    }
    Ok(out)
}

/// S_f/μ̂, the image of [`nearby_fiber`] under the quotient map.
pub fn nearby_fiber_quotient<C: Coefficient>(m: &SncModel<C>) -> Result<MotivicClass<C>, NearbyError> {
    Ok(quotient_homomorphism(&nearby_fiber(m)?, &m.quotient_rules())?)
}

/// Σ (1−L)^{|I|−1}[E_I^o] in M, assembled from the stratum classes.
pub fn stratum_sum<C: Coefficient>(m: &SncModel<C>) -> Result<MotivicClass<C>, NearbyError> {
    let mut out = MotivicClass::zero(RingTag::M);
    for s in &m.strata {
        out = out.add(&s.class.coerce(RingTag::M)?.mul_poly(&one_minus_l_pow(s.subset.len() - 1))?)?;
    }
    Ok(out)
}

/// Class of the special fiber: the sum of all strata, checked against a
/// declared total.
pub fn special_fiber_class<C: Coefficient>(m: &SncModel<C>) -> Result<MotivicClass<C>, NearbyError> {
    let mut sum = MotivicClass::zero(RingTag::K0);
    for s in &m.strata {
        sum = sum.add(&s.class)?;
    }
    if let Some(total) = &m.total_class {
        if *total != sum {
            return Err(NearbyError::TotalClassMismatch { declared: total.to_string(), computed: sum.to_string() });
        }
    }
    Ok(sum)
}

/// R(f): the special fiber modulo L.
pub fn motivic_reduction<C: Coefficient>(m: &SncModel<C>) -> Result<MotivicClass<C>, NearbyError> {
    Ok(special_fiber_class(m)?.mod_l()?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceReport<C> {
    pub holds: bool,
    /// S_f/μ̂ mod L.
    pub quotient_residue: MotivicClass<C>,
    /// R(f), read in the same ring.
    pub reduction: MotivicClass<C>,
    /// quotient_residue − reduction when they differ.
    pub witness: Option<MotivicClass<C>>,
    /// Strata whose cover quotient disagrees with the declared class.
    pub cover_mismatches: Vec<String>,
}

impl<C: Coefficient> fmt::Display for CongruenceReport<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S_f/mu mod L = {}, R(f) = {}: {}", self.quotient_residue, self.reduction, if self.holds { "congruent" } else { "NOT congruent" })?;
        if let Some(w) = &self.witness {
            write!(f, " (difference {w})")?;
        }
        Ok(())
    }
}

/// Compares S_f/μ̂ mod L with R(f).
pub fn congruence_check<C: Coefficient>(m: &SncModel<C>) -> Result<CongruenceReport<C>, NearbyError> {
    let quotient_residue = nearby_fiber_quotient(m)?.mod_l()?;
    let reduction = motivic_reduction(m)?.coerce(quotient_residue.tag())?;
    let diff = quotient_residue.sub(&reduction)?;
    let holds = diff.is_zero();
    Ok(CongruenceReport {
        holds,
        quotient_residue,
        reduction,
        witness: (!holds).then_some(diff),
        cover_mismatches: m.cover_mismatches()?,
    })
}

/// Which projective space is glued in along the center of a blowup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExceptionalFiber {
    /// [P^c] for a center of codimension c.
    #[default]
    Codim,
    /// [P^{c−1}], the fiber of the exceptional divisor.
    CodimMinusOne,
}

impl ExceptionalFiber {
    pub fn exponent(self, codim: u32) -> Option<u32> {
        match self {
            ExceptionalFiber::Codim => Some(codim),
            ExceptionalFiber::CodimMinusOne => codim.checked_sub(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupStep<C> {
    pub codim: u32,
    pub center_class: MotivicClass<C>,
    pub ambient_class: MotivicClass<C>,
}

/// Whether replacing the center by its exceptional fiber bundle leaves the
/// class unchanged modulo L.
pub fn blowup_step_identity<C: Coefficient>(s: &BlowupStep<C>, fiber: ExceptionalFiber) -> Result<bool, NearbyError> {
    let e = fiber
        .exponent(s.codim)
        .ok_or_else(|| NearbyError::InvalidBlowup(format!("codimension {} has no exceptional fiber", s.codim)))?;
    let tag = s.ambient_class.tag();
    let bundle = s.center_class.mul(&MotivicClass::projective_space(tag, e))?;
    let after = s.ambient_class.sub(&s.center_class)?.add(&bundle)?;
    Ok(after.mod_l()? == s.ambient_class.mod_l()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationReport<T> {
    pub nearby_quotient: T,
    pub reduction: T,
    /// Σ (1 − L)^{|I|−1} realize([E_I^o]) computed in the target.
    pub assembled: T,
    pub assembly_holds: bool,
    /// realize(S_f/μ̂) ≡ realize(R(f)) modulo the image of L.
    pub congruent: bool,
    pub generic_fiber: Option<T>,
    pub reduction_is_one: bool,
    /// If the generic fiber is 1 mod L so is the special fiber; None
    /// without a declared generic fiber.
    pub one_mod_l_shadow: Option<bool>,
}

fn is_one_mod<T: RealizationTarget>(x: &T, l: &T) -> Result<bool, NearbyError> {
    let d = x.clone() + (-T::one());
    Ok(d.reduce_mod(l).ok_or(MclassError::UnsupportedReduction)?.is_zero())
}

/// Realizes the model's classes, with plain symbols taking the images in
/// `spec` or else the realization of their declared values.
pub fn realize_model<C: Coefficient, T: RealizationTarget>(
    m: &SncModel<C>,
    spec: &RealizationSpec<T>,
) -> Result<RealizationReport<T>, NearbyError> {
    let mut full = spec.clone();
    let base = RealizationSpec::new(spec.l_image.clone());
    for (name, v) in &m.symbol_values {
        if !full.symbol_images.contains_key(name) {
            full.symbol_images.insert(name.clone(), v.realize(&base)?);
        }
    }
    let l = &full.l_image;
    let nearby_quotient = nearby_fiber_quotient(m)?.realize(&full)?;
    let reduction = motivic_reduction(m)?.realize(&full)?;
    let one_minus_l = T::one() + (-l.clone());
    let mut assembled = T::zero();
    for s in &m.strata {
        let mut w = T::one();
        for _ in 1..s.subset.len() {
            w = w * one_minus_l.clone();
        }
        assembled = assembled + w * s.class.realize(&full)?;
    }
    let assembly_holds = assembled == nearby_quotient;
    let diff = nearby_quotient.clone() + (-reduction.clone());
    let congruent = diff.reduce_mod(l).ok_or(MclassError::UnsupportedReduction)?.is_zero();
    let generic_fiber = m.generic_fiber.as_ref().map(|g| g.realize(&full)).transpose()?;
    let reduction_is_one = is_one_mod(&reduction, l)?;
    let one_mod_l_shadow = match &generic_fiber {
        Some(g) => Some(!is_one_mod(g, l)? || reduction_is_one),
        None => None,
    };
    Ok(RealizationReport {
        nearby_quotient,
        reduction,
        assembled,
        assembly_holds,
        congruent,
        generic_fiber,
        reduction_is_one,
        one_mod_l_shadow,
    })
}

#[cfg(test)]
mod tests;
