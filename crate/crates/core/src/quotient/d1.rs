//! Invariant rings of A^1_K under normalized actions.
//!
//! The descent removes one subgroup of order p at a time. With γ the p-th
//! root of the first remaining wild generator and γ(x) = x + b:
//!
//! * b = 0: the new coordinate is x itself over the fixed field of γ;
//! * γ trivial on the current field: x^p − b^{p−1}x;
//! * otherwise the current field is Artin–Schreier over the fixed field K'
//!   and x − b' for an explicit b' built from the basis 1, ω, v_3, ..., v_p,
//!   followed by a projection of b' onto the tame eigencomponent.
//!
//! Once only tame generators remain, the invariant ring is k[c·y^D] for the
//! least D admitting a nonzero c.

use std::collections::BTreeMap;

use crate::action::{GeneratorKind, SemiLinearAffineAction, TameFixedPoint};
use crate::gfq::{FieldElement, FpMatrix, Fq};

use super::kpoly::{KPoly, PolyRecord};
use super::{ComputationTrace, GenRecord, InvariantRingResult, QuotientError, StepKind, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct D1Gen {
    pub kind: GeneratorKind,
    pub order: u64,
    pub twist: u32,
    pub lambda: FieldElement,
    pub shift: FieldElement,
}

impl D1Gen {
    fn record(&self) -> GenRecord {
        GenRecord {
            kind: self.kind,
            order: self.order,
            twist: self.twist,
            lambda: self.lambda.coords().to_vec(),
            shift: self.shift.coords().to_vec(),
        }
    }
}

pub(crate) struct Ctx<'a> {
    pub f: Fq<'a>,
    pub base_degree: usize,
    pub n: u32,
    pub p: u32,
}

impl Ctx<'_> {
    fn abs(&self, twist: u32) -> usize {
        self.base_degree * twist as usize
    }

    /// (σ,λ,c)∘(σ',λ',c') = (σσ', σ(λ')λ, σ(λ')c + σ(c'))
    fn compose(&self, g1: &D1Gen, g2: &D1Gen) -> D1Gen {
        let f = self.f;
        let s = self.abs(g1.twist);
        let sl = f.frob(&g2.lambda, s);
        D1Gen {
            kind: g1.kind,
            order: g1.order,
            twist: (g1.twist + g2.twist) % self.n,
            lambda: f.mul(&sl, &g1.lambda),
            shift: f.add(&f.mul(&sl, &g1.shift), &f.frob(&g2.shift, s)),
        }
    }

    fn power(&self, g: &D1Gen, e: u64) -> D1Gen {
        let f = self.f;
        let mut acc = D1Gen { kind: g.kind, order: g.order, twist: 0, lambda: f.one(), shift: f.zero() };
        for _ in 0..e {
            acc = self.compose(&acc, g);
        }
        acc
    }

    /// Induced datum on the coordinate `sub(x)`: g(sub) = λ'·sub + c'.
    fn induce(&self, g: &D1Gen, sub: &KPoly, field_degree: usize) -> Result<D1Gen, QuotientError> {
        let f = self.f;
        let image = sub.act(f, self.abs(g.twist), &g.lambda, &g.shift);
        let lead = sub.leading().ok_or_else(|| QuotientError::ShapeViolation("zero substitution".into()))?;
        let deg = sub.degree().unwrap_or(0);
        let lambda = f.div(&image.coeff(f, deg), lead).expect("nonzero leading coefficient");
        let rest = image.sub(f, &sub.scale(f, &lambda));
        if rest.degree().unwrap_or(0) > 0 {
            return Err(QuotientError::ShapeViolation(format!("generator image {image} is not affine in {sub}")));
        }
        let shift = rest.coeff(f, 0);
        if !f.in_subfield(&lambda, field_degree) || !f.in_subfield(&shift, field_degree) {
            return Err(QuotientError::ShapeViolation(format!(
                "induced coefficients {lambda}, {shift} leave the field of degree {field_degree}"
            )));
        }
        Ok(D1Gen { lambda, shift, ..g.clone() })
    }
}

fn gens_of(a: &SemiLinearAffineAction) -> Vec<D1Gen> {
    a.generators()
        .iter()
        .enumerate()
        .map(|(i, g)| D1Gen {
            kind: a.kind(i),
            order: g.declared_order,
            twist: g.datum.twist,
            lambda: g.datum.matrix[0][0].clone(),
            shift: g.datum.translation[0].clone(),
        })
        .collect()
}

struct Run<'a> {
    ctx: Ctx<'a>,
    gens: Vec<D1Gen>,
    field_degree: usize,
    total: KPoly,
    steps: Vec<TraceStep>,
}

impl Run<'_> {
    fn push(&mut self, kind: StepKind, params: BTreeMap<String, String>, sub: Option<KPoly>, new_degree: usize) -> Result<(), QuotientError> {
        let before = self.field_degree;
        if let Some(s) = &sub {
            self.gens = self.gens.iter().map(|g| self.ctx.induce(g, s, new_degree)).collect::<Result<_, _>>()?;
            self.total = s.compose(self.ctx.f, &self.total);
        }
        self.field_degree = new_degree;
        self.steps.push(TraceStep {
            kind,
            params,
            substitution: sub.as_ref().map(PolyRecord::from),
            field_degree_before: before,
            field_degree_after: new_degree,
            generators_after: self.gens.iter().map(D1Gen::record).collect(),
        });
        Ok(())
    }

    fn check_shape(&self) -> Result<(), QuotientError> {
        let f = self.ctx.f;
        for (i, g) in self.gens.iter().enumerate() {
            let ok = match g.kind {
                GeneratorKind::Wild => g.lambda == f.one(),
                GeneratorKind::Tame => g.shift.is_zero() && f.in_subfield(&g.lambda, self.ctx.base_degree),
            };
            if !ok {
                return Err(QuotientError::ShapeViolation(format!(
                    "generator {i} became y -> ({})y + ({})",
                    g.lambda, g.shift
                )));
            }
        }
        Ok(())
    }

    /// Joint projection onto {c : τ_l(c) = μ_l c} over the tame generators.
    fn tame_projection(&self, c: &FieldElement) -> FieldElement {
        let f = self.ctx.f;
        let mut cur = c.clone();
        for g in self.gens.iter().filter(|g| g.kind == GeneratorKind::Tame) {
            let q = g.order;
            let mu_inv = f.inv(&g.lambda).expect("roots of unity are nonzero");
            let s = self.ctx.abs(g.twist);
            let mut acc = f.zero();
            let mut term = cur.clone();
            let mut weight = f.one();
            for _ in 0..q {
                acc = f.add(&acc, &f.mul(&weight, &term));
                term = f.frob(&term, s);
                weight = f.mul(&weight, &mu_inv);
            }
            let inv_q = f.inv(&f.from_int((q % self.ctx.p as u64) as i64)).expect("q prime to p");
            cur = f.mul(&acc, &inv_q);
        }
        cur
    }

    fn descend_once(&mut self, idx: usize) -> Result<(), QuotientError> {
        let f = self.ctx.f;
        let p = self.ctx.p;
        let alpha = self.gens[idx].clone();
        let gamma = self.ctx.power(&alpha, alpha.order / p as u64);
        if gamma.lambda != f.one() {
            return Err(QuotientError::ShapeViolation(format!("order-p element scales by {}", gamma.lambda)));
        }
        let b = gamma.shift.clone();
        let n_cur = self.field_degree;
        let s_gamma = self.ctx.abs(gamma.twist);
        let trivial_on_field = s_gamma % n_cur == 0;
        let new_degree = if trivial_on_field { n_cur } else { n_cur / p as usize };
        if !trivial_on_field && num_integer::gcd(s_gamma, n_cur) != new_degree {
            return Err(QuotientError::ShapeViolation("order-p element acts on the field with order other than p".into()));
        }

        let mut params = BTreeMap::new();
        params.insert("generator".into(), idx.to_string());
        params.insert("gamma_twist".into(), gamma.twist.to_string());
        params.insert("b".into(), b.to_string());
        params.insert("order_before".into(), alpha.order.to_string());
        self.gens[idx].order /= p as u64;
        self.push(StepKind::SubgroupDescent, params, None, n_cur)?;

        let x = KPoly::x(f);
        if b.is_zero() {
            let mut params = BTreeMap::new();
            params.insert("fixed_field_degree".into(), new_degree.to_string());
            return self.push(StepKind::CaseBZero, params, Some(x), new_degree);
        }
        if trivial_on_field {
            // x^p − b^{p−1} x, a unit multiple of x + (p−1) b^{1−p} x^p
            let bp1 = f.pow(&b, p as u64 - 1);
            let mut coeffs = vec![f.zero(); p as usize + 1];
            coeffs[1] = f.neg(&bp1);
            coeffs[p as usize] = f.one();
            let mut params = BTreeMap::new();
            params.insert("rescaling".into(), f.neg(&bp1).to_string());
            return self.push(StepKind::CaseFrobeniusTrivial, params, Some(KPoly::from_coeffs(coeffs)), new_degree);
        }

        // Artin–Schreier: γ(ω) = ω + 1, v_i = binom(ω, i − 1)
        let as_data = f.artin_schreier(n_cur, new_degree)?;
        let delta = f.sub(&f.frob(&as_data.omega, s_gamma), &as_data.omega);
        let omega = f.div(&as_data.omega, &delta).ok_or_else(|| QuotientError::Internal("degenerate Artin-Schreier generator".into()))?;
        let mut basis = vec![f.one()];
        for i in 1..p as usize {
            let prev = basis[i - 1].clone();
            let num = f.mul(&prev, &f.sub(&omega, &f.from_int(i as i64 - 1)));
            basis.push(f.div(&num, &f.from_int(i as i64)).expect("i < p"));
        }
        let sub = f.subfield(new_degree)?;
        let mut columns = Vec::new();
        for v in &basis {
            for s in sub.basis() {
                columns.push(f.mul(s, v).coords().to_vec());
            }
        }
        let m = FpMatrix::from_columns(p, f.degree(), &columns);
        let sol = m.solve(b.coords()).ok_or_else(|| QuotientError::ShapeViolation(format!("{b} is not in the current field")))?;
        let bi: Vec<FieldElement> = sol.chunks(new_degree).map(|c| sub.element(c)).collect();
        if !bi[p as usize - 1].is_zero() {
            return Err(QuotientError::ShapeViolation("top Artin-Schreier coordinate of b is nonzero".into()));
        }
        let mut bprime = f.zero();
        for i in 0..p as usize - 1 {
            bprime = f.add(&bprime, &f.mul(&bi[i], &basis[i + 1]));
        }
        let mut params = BTreeMap::new();
        params.insert("omega".into(), omega.to_string());
        params.insert("b_prime".into(), bprime.to_string());
        params.insert("fixed_field_degree".into(), new_degree.to_string());
        let minus = f.neg(&bprime);
        self.push(StepKind::CaseArtinSchreier, params, Some(KPoly::linear(&f.one(), &minus)), new_degree)?;

        let b1 = self.tame_projection(&bprime);
        if b1 != bprime {
            // new coordinate x − b_1' = (x − b') + (b' − b_1')
            let mut params = BTreeMap::new();
            params.insert("b1_prime".into(), b1.to_string());
            let shift = f.sub(&bprime, &b1);
            self.push(StepKind::EigencomponentFix, params, Some(KPoly::linear(&f.one(), &shift)), new_degree)?;
        }
        Ok(())
    }

    fn tame_base(&mut self, bound: u64) -> Result<(), QuotientError> {
        let f = self.ctx.f;
        let p = self.ctx.p;
        let nk = f.degree();
        let ident = FpMatrix::identity(p, nk);
        let membership = f.frob_matrix_power(self.field_degree).sub(&ident);
        for d in 1..=bound.max(1) {
            let mut system = membership.clone();
            for g in &self.gens {
                let mu_d = f.pow(&g.lambda, d);
                let op = f.mul_matrix(&mu_d).mul(&f.frob_matrix_power(self.ctx.abs(g.twist))).sub(&ident);
                system = system.vstack(&op);
            }
            let kernel = system.kernel();
            if kernel.is_empty() {
                continue;
            }
            let c = least_nonzero(f, &kernel);
            let mut coeffs = vec![f.zero(); d as usize + 1];
            coeffs[d as usize] = c.clone();
            let mut params = BTreeMap::new();
            params.insert("degree".into(), d.to_string());
            params.insert("coefficient".into(), c.to_string());
            return self.push(StepKind::TameBase, params, Some(KPoly::from_coeffs(coeffs)), self.ctx.base_degree);
        }
        Err(QuotientError::ShapeViolation(format!("no tame invariant of degree at most {bound}")))
    }
}

/// Least nonzero element (in element order) of the F_p-span of `vectors`;
/// falls back to the first basis vector when the span is large.
fn least_nonzero(f: Fq<'_>, vectors: &[Vec<u32>]) -> FieldElement {
    let p = f.p() as u64;
    let dim = vectors.len() as u32;
    if p.checked_pow(dim).is_some_and(|n| n <= 1 << 16) {
        let total = p.pow(dim);
        let mut best: Option<FieldElement> = None;
        for idx in 1..total {
            let mut i = idx;
            let mut acc = vec![0u32; f.degree()];
            for v in vectors {
                let c = (i % p) as u32;
                i /= p;
                for (a, b) in acc.iter_mut().zip(v) {
                    *a = (*a + c * b) % f.p();
                }
            }
            let e = f.from_coords(&acc);
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        }
        best.expect("nonzero span")
    } else {
        f.from_coords(&vectors[0])
    }
}

pub(crate) fn invariant_ring_d1(a: &SemiLinearAffineAction) -> Result<InvariantRingResult, QuotientError> {
    if a.dimension() != 1 {
        return Err(QuotientError::NotDimensionOne(a.dimension()));
    }
    a.require_valid()?;
    let f = a.field();
    let ctx = Ctx { f, base_degree: a.base_degree(), n: a.n(), p: a.p() };
    let mut run = Run { ctx, gens: gens_of(a), field_degree: f.degree(), total: KPoly::x(f), steps: Vec::new() };

    let norm = a.normalize()?;
    if !norm.was_normalized {
        let w = norm.change_of_basis[0][0].clone();
        let mut params = BTreeMap::new();
        params.insert("scale".into(), w.to_string());
        run.push(StepKind::Normalize, params, Some(KPoly::linear(&w, &f.zero())), f.degree())?;
    }
    if let TameFixedPoint::Recenter(v) = norm.action.tame_fixed_point()? {
        let mut params = BTreeMap::new();
        params.insert("fixed_point".into(), v[0].to_string());
        run.push(StepKind::Recenter, params, Some(KPoly::linear(&f.one(), &f.neg(&v[0]))), f.degree())?;
    }
    run.check_shape()?;

    while let Some(idx) = run.gens.iter().position(|g| g.kind == GeneratorKind::Wild && g.order > 1) {
        run.descend_once(idx)?;
        run.check_shape()?;
    }
    let tame_order: u64 = run.gens.iter().filter(|g| g.kind == GeneratorKind::Tame).map(|g| g.order).product();
    run.tame_base(tame_order.max(1))?;
    if run.gens.iter().any(|g| g.lambda != f.one() || !g.shift.is_zero()) {
        return Err(QuotientError::ShapeViolation("final coordinate is not invariant".into()));
    }
    Ok(InvariantRingResult {
        invariant_field_degree: run.field_degree,
        base_degree: a.base_degree(),
        generator_poly: run.total,
        trace: ComputationTrace { steps: run.steps },
    })
}

/// Re-applies the recorded substitutions to the original action and checks
/// every recorded intermediate presentation and the final generator.
pub(crate) fn replay_d1(a: &SemiLinearAffineAction, result: &InvariantRingResult) -> Result<(), QuotientError> {
    let f = a.field();
    let ctx = Ctx { f, base_degree: a.base_degree(), n: a.n(), p: a.p() };
    let mut gens = gens_of(a);
    let mut total = KPoly::x(f);
    for (i, step) in result.trace.steps.iter().enumerate() {
        for (g, r) in gens.iter_mut().zip(&step.generators_after) {
            g.order = r.order;
        }
        if let Some(sub) = &step.substitution {
            let s = KPoly::from_coords(f, &sub.coeffs);
            gens = gens.iter().map(|g| ctx.induce(g, &s, step.field_degree_after)).collect::<Result<_, _>>()?;
            total = s.compose(f, &total);
        }
        let recorded: Vec<GenRecord> = gens.iter().map(D1Gen::record).collect();
        if recorded != step.generators_after {
            return Err(QuotientError::ReplayMismatch(format!("step {i} ({:?})", step.kind)));
        }
    }
    if total != result.generator_poly {
        return Err(QuotientError::ReplayMismatch(format!("final generator {total} != {}", result.generator_poly)));
    }
    Ok(())
}
