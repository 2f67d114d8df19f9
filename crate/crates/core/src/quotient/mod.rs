//! Quotients of affine spaces by finite abelian groups.
//!
//! [`quotient_class`] returns L^d for a valid action on A^d_K, tagged in K0
//! for tame groups and in K0_mod otherwise, with a trace of the descent. In
//! dimension one the trace carries the explicit invariant generator; in
//! higher dimension it records the projection to the first coordinate and
//! the generic stabilizers, and the point-count oracle supplies the numeric
//! confirmation.

mod d1;
pub mod kpoly;
pub mod mpoly;
pub mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionError, GeneratorKind, SemiLinearAffineAction, TameFixedPoint};
use crate::gfq::{Fq, GfError};
use crate::mclass::{BaseRing, Coefficient, MclassError, MotivicClass, RingTag};

pub use kpoly::{KPoly, PolyRecord};
pub use mpoly::{invariant_check, MPoly};
pub use oracle::{orbit_count_oracle, presented_count, stabilizer, OracleBudget, OracleMode, Point, PointSpace, PresentedCount, StabilizerDatum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Class(#[from] MclassError),
    #[error("expected a one-dimensional action, got dimension {0}")]
    NotDimensionOne(usize),
    #[error("action left the normalized shape: {0}")]
    ShapeViolation(String),
    #[error("trace replay mismatch at {0}")]
    ReplayMismatch(String),
    #[error("counting field of absolute degree {required_degree} exceeds the budget {max}")]
    BudgetExceeded { required_degree: usize, max: usize },
    #[error("enumeration of {points:?} points exceeds the budget {max}")]
    EnumerationTooLarge { points: Option<u128>, max: u64 },
    #[error("no quotient rule for the acted symbol {0}")]
    MissingQuotientRule(String),
    #[error("base class has no declared quotient: {0}")]
    UnquotientedBase(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Normalize,
    Recenter,
    SubgroupDescent,
    CaseBZero,
    CaseFrobeniusTrivial,
    CaseArtinSchreier,
    EigencomponentFix,
    TameBase,
    FibrationDescent,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Normalize => "normalize",
            StepKind::Recenter => "recenter",
            StepKind::SubgroupDescent => "subgroup-descent",
            StepKind::CaseBZero => "case-b-zero",
            StepKind::CaseFrobeniusTrivial => "case-frobenius-trivial",
            StepKind::CaseArtinSchreier => "case-artin-schreier",
            StepKind::EigencomponentFix => "eigencomponent-fix",
            StepKind::TameBase => "tame-base",
            StepKind::FibrationDescent => "fibration-descent",
        }
    }
}

/// One-dimensional generator data y ↦ λy + c with its twist, as coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenRecord {
    pub kind: GeneratorKind,
    pub order: u64,
    pub twist: u32,
    pub lambda: Vec<u32>,
    pub shift: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub kind: StepKind,
    pub params: BTreeMap<String, String>,
    /// New coordinate as a polynomial in the previous one.
    pub substitution: Option<PolyRecord>,
    pub field_degree_before: usize,
    pub field_degree_after: usize,
    pub generators_after: Vec<GenRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ComputationTrace {
    pub steps: Vec<TraceStep>,
}

impl ComputationTrace {
    pub fn kinds(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }

    pub fn contains(&self, kind: StepKind) -> bool {
        self.steps.iter().any(|s| s.kind == kind)
    }
}

impl fmt::Display for ComputationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            write!(f, "{i:>3} {:<24} F_p^{} -> F_p^{}", s.kind.name(), s.field_degree_before, s.field_degree_after)?;
            if let Some(sub) = &s.substitution {
                write!(f, "  y = {}", sub.text)?;
            }
            for (k, v) in &s.params {
                write!(f, "  {k}={v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// K[x]^G = k'[Y] with Y the generator polynomial in the original coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantRingResult {
    /// Absolute degree of k' over F_p.
    pub invariant_field_degree: usize,
    /// Absolute degree of k.
    pub base_degree: usize,
    pub generator_poly: KPoly,
    pub trace: ComputationTrace,
}

impl InvariantRingResult {
    /// Re-derives every recorded presentation from the original action.
    pub fn replay(&self, a: &SemiLinearAffineAction) -> Result<(), QuotientError> {
        d1::replay_d1(a, self)
    }

    /// The generator as a polynomial in one variable, for [`invariant_check`].
    pub fn generator_mpoly(&self, f: Fq<'_>) -> MPoly {
        let x = MPoly::var(f, 1, 0);
        let mut out = MPoly::zero(1);
        for (i, c) in self.generator_poly.coeffs().iter().enumerate() {
            out = out.add(f, &x.pow(f, i as u32).scale(f, c));
        }
        out
    }
}

pub fn invariant_ring_d1(a: &SemiLinearAffineAction) -> Result<InvariantRingResult, QuotientError> {
    d1::invariant_ring_d1(a)
}

fn quotient_tag(a: &SemiLinearAffineAction) -> RingTag {
    if a.group().is_tame() {
        RingTag::K0
    } else {
        RingTag::K0_MOD
    }
}

/// [V/G] = L^d with the descent trace.
pub fn quotient_class<C: Coefficient>(a: &SemiLinearAffineAction) -> Result<(MotivicClass<C>, ComputationTrace), QuotientError> {
    a.require_valid()?;
    let tag = quotient_tag(a);
    let d = a.dimension();
    let class = MotivicClass::lefschetz(tag).pow(d as u32);
    match d {
        0 => Ok((MotivicClass::one(tag), ComputationTrace::default())),
        1 => {
            let r = invariant_ring_d1(a)?;
            Ok((class, r.trace))
        }
        _ => {
            let mut steps = Vec::new();
            let norm = a.normalize()?;
            let f = a.field();
            if !norm.was_normalized {
                let rows: Vec<String> = norm
                    .change_of_basis
                    .iter()
                    .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))
                    .collect();
                steps.push(plain_step(StepKind::Normalize, [("change_of_basis", format!("[{}]", rows.join("; ")))], f.degree()));
            }
            let mut cur = norm.action;
            if let TameFixedPoint::Recenter(v) = cur.tame_fixed_point()? {
                let pt: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                steps.push(plain_step(StepKind::Recenter, [("fixed_point", pt.join(", "))], f.degree()));
                cur = cur.recentered(&v)?;
            }
            for i in 0..d {
                let base = cur.restrict_to_first()?;
                let r = invariant_ring_d1(&base)?;
                let kernel: Vec<String> = base
                    .group_elements()
                    .into_iter()
                    .filter(|g| base.is_identity(&g.datum))
                    .map(|g| format!("{:?}", g.word))
                    .collect();
                let mut params = BTreeMap::new();
                params.insert("coordinate".into(), (i + 1).to_string());
                params.insert("fiber_dimension".into(), (d - i - 1).to_string());
                params.insert("base_generator".into(), r.generator_poly.to_string());
                params.insert("generic_stabilizer_order".into(), kernel.len().to_string());
                params.insert("generic_stabilizer".into(), kernel.join(" "));
                steps.push(TraceStep {
                    kind: StepKind::FibrationDescent,
                    params,
                    substitution: None,
                    field_degree_before: f.degree(),
                    field_degree_after: a.base_degree(),
                    generators_after: Vec::new(),
                });
                if i + 1 < d {
                    cur = cur.drop_first()?;
                }
            }
            Ok((class, ComputationTrace { steps }))
        }
    }
}

fn plain_step<const N: usize>(kind: StepKind, params: [(&str, String); N], degree: usize) -> TraceStep {
    TraceStep {
        kind,
        params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        substitution: None,
        field_degree_before: degree,
        field_degree_after: degree,
        generators_after: Vec::new(),
    }
}

/// Declared quotients of acted symbols, and whether the group is wild.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientRules<C> {
    pub images: BTreeMap<String, MotivicClass<C>>,
    pub acted: Vec<String>,
    pub wild: bool,
}

impl<C: Coefficient> QuotientRules<C> {
    pub fn new(wild: bool) -> Self {
        QuotientRules { images: BTreeMap::new(), acted: Vec::new(), wild }
    }

    /// Declares `symbol` as acted on with quotient `image`.
    pub fn with_rule(mut self, symbol: &str, image: MotivicClass<C>) -> Self {
        self.images.insert(symbol.to_string(), image);
        if !self.acted.iter().any(|s| s == symbol) {
            self.acted.push(symbol.to_string());
        }
        self
    }

    /// Declares an acted symbol without a quotient.
    pub fn with_acted(mut self, symbol: &str) -> Self {
        if !self.acted.iter().any(|s| s == symbol) {
            self.acted.push(symbol.to_string());
        }
        self
    }

    fn is_acted(&self, s: &str) -> bool {
        self.acted.iter().any(|a| a == s)
    }

    /// Tag of the quotient ring for an equivariant tag.
    pub fn target_tag(&self, tag: RingTag) -> RingTag {
        let base = match (tag.is_localized(), self.wild || tag.is_mod()) {
            (false, false) => BaseRing::K0,
            (false, true) => BaseRing::K0Mod,
            (true, false) => BaseRing::M,
            (true, true) => BaseRing::MMod,
        };
        let t = RingTag::K0.with_base(base);
        if tag.is_residue() {
            t.residue()
        } else {
            t
        }
    }
}

/// The additive map from equivariant classes to classes of quotients: acted
/// symbols go to their declared quotients, trivially-acted factors and L are
/// kept.
pub fn quotient_homomorphism<C: Coefficient>(c: &MotivicClass<C>, rules: &QuotientRules<C>) -> Result<MotivicClass<C>, QuotientError> {
    let target = rules.target_tag(c.tag());
    let mut out = MotivicClass::zero(target);
    for (mono, poly) in c.terms() {
        let (acted, plain) = mono.split(|s| rules.is_acted(s));
        let mut image = MotivicClass::from_poly(target, poly.clone())?.mul_monomial(&plain);
        match acted.degree() {
            0 => {}
            1 => {
                let (name, _) = acted.powers().next().expect("one acted symbol");
                let q = rules.images.get(name).ok_or_else(|| QuotientError::MissingQuotientRule(name.to_string()))?;
                image = image.mul(&q.coerce(target).or_else(|_| retag(q, target))?)?;
            }
            _ => {
                return Err(QuotientError::MissingQuotientRule(format!(
                    "{acted} (products of acted symbols need their own rule)"
                )))
            }
        }
        out = out.add(&image)?;
    }
    Ok(out)
}

/// Reads a class in another tag with the same terms.
fn retag<C: Coefficient>(c: &MotivicClass<C>, tag: RingTag) -> Result<MotivicClass<C>, MclassError> {
    MotivicClass::from_terms(tag, c.terms().map(|(m, p)| (m.clone(), p.clone())))
}

/// L^d · [B/G] for an affine bundle of rank d over an acted base B.
pub fn affine_bundle_quotient_rule<C: Coefficient>(
    rank: u32,
    base_class: &MotivicClass<C>,
    rules: &QuotientRules<C>,
) -> Result<MotivicClass<C>, QuotientError> {
    if base_class.tag().equivariant().is_none() {
        return Err(QuotientError::UnquotientedBase(format!("{base_class} carries no equivariant tag")));
    }
    let q = quotient_homomorphism(base_class, rules).map_err(|e| match e {
        QuotientError::MissingQuotientRule(s) => QuotientError::UnquotientedBase(s),
        other => other,
    })?;
    Ok(q.mul(&MotivicClass::lefschetz(q.tag()).pow(rank))?)
}
