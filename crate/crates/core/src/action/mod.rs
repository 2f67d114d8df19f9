//! Finite abelian groups acting on A^d_K by semi-linear affine maps.
//!
//! A generator datum (σ, A, a) acts on the coordinate ring K[x_1..x_d] by
//! `c ↦ σ(c)` on scalars and `x_i ↦ Σ_j A_ij x_j + a_i`, where σ is the
//! `twist`-th power of the |k|-Frobenius on K. Composition of ring maps gives
//!
//! ```text
//! (σ, A, a) ∘ (σ', A', a') = (σσ', σ(A')·A, σ(A')·a + σ(a'))
//! ```
//!
//! Generators are listed wild first (orders p^{r_i}), then tame (orders q_j
//! prime to p), one per cyclic factor of the group.
//!
//! In normal form wild linear parts are lower unitriangular
//! (`α(x_i) = x_i + Σ_{j<i} a_ij x_j + a_i`) and tame linear parts are diagonal with roots of unity from k.

mod io;
pub mod kmat;

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfq::{FieldElement, FieldTower, FpMatrix, Fq, GfError};

pub use io::{ActionDoc, ElementRepr, GeneratorDoc};
pub use kmat::KMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("malformed action: {0}")]
    Malformed(String),
    #[error("action violates the hypotheses: {0}")]
    HypothesisViolation(ValidationReport),
    #[error("normalization failed: {0}")]
    NormalizationFailed(String),
    #[error("tame fixed-point system is inconsistent")]
    Inconsistent,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Orders of the cyclic factors: wild orders are powers of p, tame orders are
/// prime to p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AbelianGroupSpec {
    #[serde(default)]
    pub wild_orders: Vec<u64>,
    #[serde(default)]
    pub tame_orders: Vec<u64>,
}

impl AbelianGroupSpec {
    pub fn new(wild_orders: Vec<u64>, tame_orders: Vec<u64>) -> Self {
        AbelianGroupSpec { wild_orders, tame_orders }
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn order(&self) -> u64 {
        self.wild_orders.iter().chain(&self.tame_orders).product()
    }

    /// q: the largest divisor of |G| prime to p.
    pub fn tame_order(&self) -> u64 {
        self.tame_orders.iter().product()
    }

    pub fn num_generators(&self) -> usize {
        self.wild_orders.len() + self.tame_orders.len()
    }

    pub fn is_tame(&self) -> bool {
        self.wild_orders.is_empty()
    }

    /// All declared orders, generator by generator.
    pub fn orders(&self) -> Vec<u64> {
        self.wild_orders.iter().chain(&self.tame_orders).copied().collect()
    }

    /// r with p^r the wild part of |G|.
    pub fn wild_rank(&self, p: u32) -> u32 {
        self.wild_orders.iter().map(|&o| p_adic_valuation(o, p as u64)).sum()
    }

    /// Problems with the orders relative to the characteristic.
    pub fn problems(&self, p: u32) -> Vec<String> {
        let p = p as u64;
        let mut out = Vec::new();
        for &o in &self.wild_orders {
            if o < p || !is_power_of(o, p) {
                out.push(format!("wild order {o} is not a positive power of {p}"));
            }
        }
        for &o in &self.tame_orders {
            if o < 2 || o % p == 0 {
                out.push(format!("tame order {o} is not an integer >= 2 prime to {p}"));
            }
        }
        out
    }
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n > 1 && n % p == 0 {
        n /= p;
    }
    n == 1
}

fn p_adic_valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// (twist, matrix, translation) of one group element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineDatum {
    pub twist: u32,
    pub matrix: KMatrix,
    pub translation: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiLinearAffineGenerator {
    pub datum: AffineDatum,
    pub declared_order: u64,
}

/// Whether a generator is one of the wild α's or the tame β's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Wild,
    Tame,
}

#[derive(Debug, Clone)]
pub struct SemiLinearAffineAction {
    tower: Arc<FieldTower>,
    base_level: usize,
    field_level: usize,
    group: AbelianGroupSpec,
    dimension: usize,
    generators: Vec<SemiLinearAffineGenerator>,
}

/// One element of G with its exponent vector in the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub word: Vec<u64>,
    pub datum: AffineDatum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn failed_check_names(&self) -> Vec<String> {
        self.failures().iter().map(|c| c.check.clone()).collect()
    }

    fn push(&mut self, check: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult { check: check.into(), passed, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.failures();
        if failed.is_empty() {
            return write!(f, "all checks passed");
        }
        let parts: Vec<String> = failed.iter().map(|c| format!("{} ({})", c.check, c.detail)).collect();
        write!(f, "failed checks: {}", parts.join("; "))
    }
}

pub const CHECK_GROUP: &str = "group-orders";
pub const CHECK_INVERTIBLE: &str = "invertibility";
pub const CHECK_ORDERS: &str = "generator-orders";
pub const CHECK_COMMUTE: &str = "commutativity";
pub const CHECK_TWISTS: &str = "twist-surjectivity";
pub const CHECK_ROOTS: &str = "roots-of-unity";

/// Result of [`SemiLinearAffineAction::normalize`].
#[derive(Debug, Clone)]
pub struct Normalization {
    pub action: SemiLinearAffineAction,
    /// Rows are the new coordinates as linear forms in the old ones: y = T x.
    pub change_of_basis: KMatrix,
    pub was_normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TameFixedPoint {
    NoTranslationNeeded,
    /// Point v_0 fixed by every tame generator; recentering uses x' = x − v_0.
    Recenter(Vec<FieldElement>),
}

impl SemiLinearAffineAction {
    pub fn new(
        tower: Arc<FieldTower>,
        base_level: usize,
        field_level: usize,
        group: AbelianGroupSpec,
        dimension: usize,
        generators: Vec<SemiLinearAffineGenerator>,
    ) -> Result<Self, ActionError> {
        if field_level >= tower.num_levels() || base_level > field_level {
            return Err(ActionError::Malformed(format!(
                "levels k={base_level}, K={field_level} do not fit a tower with {} levels",
                tower.num_levels()
            )));
        }
        let (dk, dkk) = (tower.degree(base_level), tower.degree(field_level));
        if dkk % dk != 0 {
            return Err(ActionError::Malformed("k is not a subfield of K".into()));
        }
        let n = (dkk / dk) as u32;
        if generators.len() != group.num_generators() {
            return Err(ActionError::Malformed(format!(
                "{} generators for a group with {} cyclic factors",
                generators.len(),
                group.num_generators()
            )));
        }
        for (i, g) in generators.iter().enumerate() {
            let d = &g.datum;
            if d.matrix.len() != dimension
                || d.matrix.iter().any(|r| r.len() != dimension)
                || d.translation.len() != dimension
            {
                return Err(ActionError::Malformed(format!("generator {i} does not have dimension {dimension}")));
            }
            if d.twist >= n {
                return Err(ActionError::Malformed(format!("generator {i} has twist {} outside Z/{n}", d.twist)));
            }
            if d.matrix.iter().flatten().chain(&d.translation).any(|e| e.level() != field_level) {
                return Err(ActionError::Malformed(format!("generator {i} has entries outside K")));
            }
            if g.declared_order == 0 {
                return Err(ActionError::Malformed(format!("generator {i} has order 0")));
            }
        }
        let expected: Vec<u64> = group.orders();
        if generators.iter().map(|g| g.declared_order).ne(expected.iter().copied()) {
            return Err(ActionError::Malformed("declared generator orders differ from the group orders".into()));
        }
        Ok(SemiLinearAffineAction { tower, base_level, field_level, group, dimension, generators })
    }

    /// The trivial group acting on A^d_K.
    pub fn trivial(tower: Arc<FieldTower>, base_level: usize, field_level: usize, dimension: usize) -> Result<Self, ActionError> {
        Self::new(tower, base_level, field_level, AbelianGroupSpec::trivial(), dimension, Vec::new())
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }
    pub fn tower_arc(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn base_level(&self) -> usize {
        self.base_level
    }
    pub fn field_level(&self) -> usize {
        self.field_level
    }
    pub fn base(&self) -> Fq<'_> {
        self.tower.level(self.base_level)
    }
    pub fn field(&self) -> Fq<'_> {
        self.tower.level(self.field_level)
    }
    pub fn group(&self) -> &AbelianGroupSpec {
        &self.group
    }
    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn generators(&self) -> &[SemiLinearAffineGenerator] {
        &self.generators
    }
    pub fn p(&self) -> u32 {
        self.tower.p()
    }
    /// [K:k]
    pub fn n(&self) -> u32 {
        (self.tower.degree(self.field_level) / self.tower.degree(self.base_level)) as u32
    }
    /// Absolute degree of k over F_p.
    pub fn base_degree(&self) -> usize {
        self.tower.degree(self.base_level)
    }
    /// |k| when it fits in 64 bits.
    pub fn q(&self) -> u64 {
        (self.p() as u64).pow(self.base_degree() as u32)
    }

    pub fn kind(&self, index: usize) -> GeneratorKind {
        if index < self.group.wild_orders.len() {
            GeneratorKind::Wild
        } else {
            GeneratorKind::Tame
        }
    }

    /// Same tower and group with different generator data.
    pub fn with_data(&self, data: Vec<AffineDatum>) -> Result<Self, ActionError> {
        let gens = data
            .into_iter()
            .zip(&self.generators)
            .map(|(datum, g)| SemiLinearAffineGenerator { datum, declared_order: g.declared_order })
            .collect();
        Self::new(self.tower.clone(), self.base_level, self.field_level, self.group.clone(), self.dimension, gens)
    }

    /// σ^t as an absolute Frobenius exponent.
    pub fn twist_exponent(&self, twist: u32) -> usize {
        self.base_degree() * twist as usize
    }

    pub fn identity_datum(&self) -> AffineDatum {
        let f = self.field();
        AffineDatum { twist: 0, matrix: kmat::identity(f, self.dimension), translation: kmat::zero_vec(f, self.dimension) }
    }

    pub fn compose(&self, g1: &AffineDatum, g2: &AffineDatum) -> AffineDatum {
        let f = self.field();
        let s = self.twist_exponent(g1.twist);
        let sa2 = kmat::frob_mat(f, &g2.matrix, s);
        let matrix = kmat::mul(f, &sa2, &g1.matrix);
        let translation = kmat::add_vec(f, &kmat::apply(f, &sa2, &g1.translation), &kmat::frob_vec(f, &g2.translation, s));
        AffineDatum { twist: (g1.twist + g2.twist) % self.n(), matrix, translation }
    }

    pub fn power(&self, g: &AffineDatum, e: u64) -> AffineDatum {
        let mut acc = self.identity_datum();
        let mut base = g.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.compose(&base, &base);
            }
        }
        acc
    }

    pub fn is_identity(&self, g: &AffineDatum) -> bool {
        *g == self.identity_datum()
    }

    /// Smallest j ≥ 1 with g^j = id, searched up to `bound`.
    pub fn element_order(&self, g: &AffineDatum, bound: u64) -> Option<u64> {
        let mut acc = g.clone();
        for j in 1..=bound {
            if self.is_identity(&acc) {
                return Some(j);
            }
            acc = self.compose(&acc, g);
        }
        None
    }

    /// All |G| elements, words in lexicographic order.
    pub fn group_elements(&self) -> Vec<GroupElement> {
        let orders = self.group.orders();
        let mut out = vec![GroupElement { word: Vec::new(), datum: self.identity_datum() }];
        for (i, &o) in orders.iter().enumerate() {
            let g = &self.generators[i].datum;
            let mut next = Vec::with_capacity(out.len() * o as usize);
            for el in &out {
                let mut acc = el.datum.clone();
                for e in 0..o {
                    let mut word = el.word.clone();
                    word.push(e);
                    next.push(GroupElement { word, datum: acc.clone() });
                    acc = self.compose(&acc, g);
                }
            }
            out = next;
        }
        out
    }

    /// Datum of the element with the given exponent word.
    pub fn word_datum(&self, word: &[u64]) -> AffineDatum {
        let mut acc = self.identity_datum();
        for (g, &e) in self.generators.iter().zip(word) {
            acc = self.compose(&acc, &self.power(&g.datum, e));
        }
        acc
    }

    /// Exponent of G as an abstract group (lcm of the declared orders).
    pub fn group_exponent(&self) -> u64 {
        self.group.orders().into_iter().fold(1, |a, b| a.lcm(&b))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let f = self.field();
        let problems = self.group.problems(self.p());
        rep.push(CHECK_GROUP, problems.is_empty(), problems.join("; "));

        let singular: Vec<usize> = self
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| kmat::inverse(f, &g.datum.matrix).is_none())
            .map(|(i, _)| i)
            .collect();
        rep.push(
            CHECK_INVERTIBLE,
            singular.is_empty(),
            if singular.is_empty() { String::new() } else { format!("singular linear part for generators {singular:?}") },
        );

        let bad_orders: Vec<String> = self
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| !self.is_identity(&self.power(&g.datum, g.declared_order)))
            .map(|(i, g)| format!("generator {i} to the power {} is not the identity", g.declared_order))
            .collect();
        rep.push(CHECK_ORDERS, bad_orders.is_empty(), bad_orders.join("; "));

        let mut non_commuting = Vec::new();
        for i in 0..self.generators.len() {
            for j in i + 1..self.generators.len() {
                let (a, b) = (&self.generators[i].datum, &self.generators[j].datum);
                if self.compose(a, b) != self.compose(b, a) {
                    non_commuting.push(format!("({i},{j})"));
                }
            }
        }
        rep.push(
            CHECK_COMMUTE,
            non_commuting.is_empty(),
            if non_commuting.is_empty() {
                String::new()
            } else {
                format!("generator pairs {} do not commute", non_commuting.join(", "))
            },
        );

        let n = self.n() as u64;
        let g = self.generators.iter().fold(n, |acc, g| acc.gcd(&(g.datum.twist as u64)));
        rep.push(
            CHECK_TWISTS,
            g == 1,
            if g == 1 { String::new() } else { format!("twists generate a subgroup of index {g} in Gal(K/k) = Z/{n}") },
        );

        let q = self.group.tame_order();
        let roots = if q % self.p() as u64 == 0 {
            Err(format!("tame part {q} is divisible by p"))
        } else {
            match self.tower.roots_of_unity_present(q, self.base_level) {
                Ok(Some(_)) => Ok(()),
                Ok(None) => Err(format!("k = F_{} lacks primitive {q}-th roots of unity ({q} does not divide {})", self.q(), self.q() - 1)),
                Err(e) => Err(e.to_string()),
            }
        };
        rep.push(CHECK_ROOTS, roots.is_ok(), roots.err().unwrap_or_default());
        rep
    }

    pub fn require_valid(&self) -> Result<(), ActionError> {
        let rep = self.validate();
        if rep.is_valid() {
            Ok(())
        } else {
            Err(ActionError::HypothesisViolation(rep))
        }
    }

    /// Whether every wild linear part is lower unitriangular and every tame
    /// linear part diagonal with entries in k.
    pub fn is_normalized(&self) -> bool {
        (0..self.generators.len()).all(|i| self.normalized_shape_error(i).is_none())
    }

    fn normalized_shape_error(&self, i: usize) -> Option<String> {
        let f = self.field();
        let a = &self.generators[i].datum.matrix;
        let d = self.dimension;
        for r in 0..d {
            for c in 0..d {
                let e = &a[r][c];
                let ok = match self.kind(i) {
                    GeneratorKind::Wild => {
                        if r == c {
                            *e == f.one()
                        } else {
                            c < r || e.is_zero()
                        }
                    }
                    GeneratorKind::Tame => {
                        if r == c {
                            !e.is_zero() && f.in_subfield(e, self.base_degree())
                        } else {
                            e.is_zero()
                        }
                    }
                };
                if !ok {
                    return Some(format!("generator {i}: entry ({r},{c}) = {e}"));
                }
            }
        }
        None
    }

    /// F_p-matrix of the action of a generator on linear forms, viewed as
    /// vectors c ∈ K^d (the form Σ c_i x_i) with coordinates concatenated.
    fn form_matrix(&self, g: &AffineDatum) -> FpMatrix {
        let f = self.field();
        let nk = f.degree();
        let d = self.dimension;
        let s = self.twist_exponent(g.twist);
        let mut columns = Vec::with_capacity(d * nk);
        for i in 0..d {
            for b in 0..nk {
                let mut unit = f.zero().coords().to_vec();
                unit[b] = 1;
                let sb = f.frob(&f.from_coords(&unit), s);
                let mut col = Vec::with_capacity(d * nk);
                for j in 0..d {
                    col.extend_from_slice(f.mul(&sb, &g.matrix[i][j]).coords());
                }
                columns.push(col);
            }
        }
        FpMatrix::from_columns(self.p(), d * nk, &columns)
    }

    fn scalar_matrix(&self, mu: &FieldElement) -> FpMatrix {
        let f = self.field();
        let nk = f.degree();
        let d = self.dimension;
        let m = f.mul_matrix(mu);
        let mut out = FpMatrix::zeros(self.p(), d * nk, d * nk);
        for blk in 0..d {
            for r in 0..nk {
                for c in 0..nk {
                    out.set(blk * nk + r, blk * nk + c, m.get(r, c));
                }
            }
        }
        out
    }

    fn to_form(&self, v: &[u32]) -> Vec<FieldElement> {
        let f = self.field();
        let nk = f.degree();
        (0..self.dimension).map(|i| f.from_coords(&v[i * nk..(i + 1) * nk])).collect()
    }

    /// q_l-th roots of unity of k embedded in K, in element order.
    fn roots_in_k(&self, order: u64) -> Result<Vec<FieldElement>, ActionError> {
        let zeta = self
            .tower
            .roots_of_unity_present(order, self.base_level)?
            .ok_or_else(|| ActionError::NormalizationFailed(format!("k lacks {order}-th roots of unity")))?;
        let z = self.tower.embed(&zeta, self.field_level)?;
        let f = self.field();
        let mut out: Vec<FieldElement> = (0..order).map(|j| f.pow(&z, j)).collect();
        out.sort();
        Ok(out)
    }

    /// Coordinates in which wild generators are lower unitriangular and tame
    /// generators diagonal.
    pub fn normalize(&self) -> Result<Normalization, ActionError> {
        self.require_valid()?;
        let f = self.field();
        if self.is_normalized() {
            return Ok(Normalization {
                action: self.clone(),
                change_of_basis: kmat::identity(f, self.dimension),
                was_normalized: true,
            });
        }
        let p = self.p();
        let dim = self.dimension * f.degree();
        let ident = FpMatrix::identity(p, dim);

        // joint eigenspaces of the tame generators
        let mut spaces: Vec<Vec<Vec<u32>>> = vec![(0..dim).map(|i| ident.column(i)).collect()];
        for i in 0..self.generators.len() {
            if self.kind(i) != GeneratorKind::Tame {
                continue;
            }
            let lm = self.form_matrix(&self.generators[i].datum);
            let roots = self.roots_in_k(self.generators[i].declared_order)?;
            let mut next = Vec::new();
            for s in &spaces {
                for mu in &roots {
                    let op = lm.sub(&self.scalar_matrix(mu));
                    let piece = intersect_kernel(p, dim, s, &op);
                    if !piece.is_empty() {
                        next.push(piece);
                    }
                }
            }
            let total: usize = next.iter().map(|s| s.len()).sum();
            if total != dim {
                return Err(ActionError::NormalizationFailed(format!(
                    "tame generator {i} is not diagonalizable over k (eigenspaces span {total} of {dim})"
                )));
            }
            spaces = next;
        }

        // flag adapted to the wild generators inside each eigenspace
        let wild_ops: Vec<FpMatrix> = (0..self.generators.len())
            .filter(|&i| self.kind(i) == GeneratorKind::Wild)
            .map(|i| self.form_matrix(&self.generators[i].datum).sub(&ident))
            .collect();
        let mut sequence: Vec<Vec<u32>> = Vec::with_capacity(dim);
        for space in &spaces {
            let mut flag: Vec<Vec<u32>> = Vec::new();
            while flag.len() < space.len() {
                let ann = annihilator(p, dim, &flag);
                let ops: Vec<FpMatrix> = wild_ops.iter().map(|w| ann.mul(w)).collect();
                let stacked = ops.iter().skip(1).fold(ops.first().cloned().unwrap_or_else(|| FpMatrix::zeros(p, 0, dim)), |acc, m| acc.vstack(m));
                let level = intersect_kernel(p, dim, space, &stacked);
                let before = flag.len();
                for v in level {
                    let mut cand = flag.clone();
                    cand.push(v.clone());
                    if FpMatrix::from_columns(p, dim, &cand).rank() == cand.len() {
                        flag.push(v);
                    }
                }
                if flag.len() == before {
                    return Err(ActionError::NormalizationFailed(
                        "wild generators are not unipotent on a joint eigenspace".into(),
                    ));
                }
            }
            sequence.extend(flag);
        }

        // greedy K-basis
        let mut rows: KMatrix = Vec::new();
        for v in &sequence {
            if rows.len() == self.dimension {
                break;
            }
            let form = self.to_form(v);
            let mut cand = rows.clone();
            cand.push(form.clone());
            if kmat::rank(f, &cand) == cand.len() {
                rows.push(form);
            }
        }
        let t = rows;
        let t_inv = kmat::inverse(f, &t).ok_or_else(|| ActionError::NormalizationFailed("selected forms are dependent".into()))?;
        let data: Vec<AffineDatum> = self.generators.iter().map(|g| self.change_coordinates(&g.datum, &t, &t_inv)).collect();
        let action = self.with_data(data)?;
        for i in 0..action.generators.len() {
            if let Some(w) = action.normalized_shape_error(i) {
                return Err(ActionError::NormalizationFailed(w));
            }
        }
        Ok(Normalization { action, change_of_basis: t, was_normalized: false })
    }

    /// Datum in coordinates y = T x: (σ, σ(T)·A·T^{-1}, σ(T)·a).
    pub fn change_coordinates(&self, g: &AffineDatum, t: &KMatrix, t_inv: &KMatrix) -> AffineDatum {
        let f = self.field();
        let st = kmat::frob_mat(f, t, self.twist_exponent(g.twist));
        AffineDatum {
            twist: g.twist,
            matrix: kmat::mul(f, &kmat::mul(f, &st, &g.matrix), t_inv),
            translation: kmat::apply(f, &st, &g.translation),
        }
    }

    /// Solves σ_l(v) − A_l v = a_l jointly over the tame generators.
    pub fn tame_fixed_point(&self) -> Result<TameFixedPoint, ActionError> {
        let tame: Vec<usize> = (0..self.generators.len()).filter(|&i| self.kind(i) == GeneratorKind::Tame).collect();
        if tame.iter().all(|&i| self.generators[i].datum.translation.iter().all(|e| e.is_zero())) {
            return Ok(TameFixedPoint::NoTranslationNeeded);
        }
        let f = self.field();
        let p = self.p();
        let nk = f.degree();
        let dim = self.dimension * nk;
        let mut system: Option<FpMatrix> = None;
        let mut rhs: Vec<u32> = Vec::new();
        for &i in &tame {
            let g = &self.generators[i].datum;
            let s = self.twist_exponent(g.twist);
            let mut columns = Vec::with_capacity(dim);
            for j in 0..self.dimension {
                for b in 0..nk {
                    let mut v = kmat::zero_vec(f, self.dimension);
                    let mut unit = vec![0u32; nk];
                    unit[b] = 1;
                    v[j] = f.from_coords(&unit);
                    let image = kmat::sub_vec(f, &kmat::frob_vec(f, &v, s), &kmat::apply(f, &g.matrix, &v));
                    columns.push(image.iter().flat_map(|e| e.coords().to_vec()).collect::<Vec<u32>>());
                }
            }
            let m = FpMatrix::from_columns(p, dim, &columns);
            system = Some(match system {
                None => m,
                Some(s) => s.vstack(&m),
            });
            rhs.extend(g.translation.iter().flat_map(|e| e.coords().to_vec()));
        }
        let system = system.expect("at least one tame generator has a translation");
        let sol = system.solve(&rhs).ok_or(ActionError::Inconsistent)?;
        Ok(TameFixedPoint::Recenter(self.to_form(&sol)))
    }

    /// Coordinates x' = x − c: translations become A c + a − σ(c).
    pub fn recentered(&self, c: &[FieldElement]) -> Result<Self, ActionError> {
        let f = self.field();
        let data = self
            .generators
            .iter()
            .map(|g| {
                let g = &g.datum;
                let s = self.twist_exponent(g.twist);
                let moved = kmat::add_vec(f, &kmat::apply(f, &g.matrix, c), &g.translation);
                AffineDatum {
                    twist: g.twist,
                    matrix: g.matrix.clone(),
                    translation: kmat::sub_vec(f, &moved, &kmat::frob_vec(f, c, s)),
                }
            })
            .collect();
        self.with_data(data)
    }

    /// Restriction of a normalized action to K[x_1], which every generator
    /// preserves.
    pub fn restrict_to_first(&self) -> Result<Self, ActionError> {
        let data = self
            .generators
            .iter()
            .map(|g| AffineDatum {
                twist: g.datum.twist,
                matrix: vec![vec![g.datum.matrix[0][0].clone()]],
                translation: vec![g.datum.translation[0].clone()],
            })
            .collect::<Vec<_>>();
        let gens = data
            .into_iter()
            .zip(&self.generators)
            .map(|(datum, g)| SemiLinearAffineGenerator { datum, declared_order: g.declared_order })
            .collect();
        Self::new(self.tower.clone(), self.base_level, self.field_level, self.group.clone(), 1, gens)
    }

    /// Action on the last d − 1 coordinates over a fixed value of x_1, valid
    /// for normalized actions (x_1 only feeds into the translations).
    pub fn drop_first(&self) -> Result<Self, ActionError> {
        let d = self.dimension;
        let gens = self
            .generators
            .iter()
            .map(|g| SemiLinearAffineGenerator {
                datum: AffineDatum {
                    twist: g.datum.twist,
                    matrix: g.datum.matrix[1..].iter().map(|r| r[1..].to_vec()).collect(),
                    translation: g.datum.translation[1..].to_vec(),
                },
                declared_order: g.declared_order,
            })
            .collect();
        Self::new(self.tower.clone(), self.base_level, self.field_level, self.group.clone(), d - 1, gens)
    }
}

/// Basis of {S x : op·S x = 0} where S has the given columns.
fn intersect_kernel(p: u32, dim: usize, space: &[Vec<u32>], op: &FpMatrix) -> Vec<Vec<u32>> {
    if space.is_empty() {
        return Vec::new();
    }
    let s = FpMatrix::from_columns(p, dim, space);
    if op.rows() == 0 {
        return space.to_vec();
    }
    let k = op.mul(&s).kernel();
    k.iter().map(|x| s.apply(x)).collect()
}

/// Matrix whose rows span the annihilator of the span of `vectors`.
fn annihilator(p: u32, dim: usize, vectors: &[Vec<u32>]) -> FpMatrix {
    if vectors.is_empty() {
        return FpMatrix::identity(p, dim);
    }
    let rows = FpMatrix::from_rows(p, dim, vectors);
    let ker = rows.kernel();
    if ker.is_empty() {
        return FpMatrix::zeros(p, 0, dim);
    }
    FpMatrix::from_rows(p, dim, &ker)
}

impl fmt::Display for SemiLinearAffineAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "G = wild {:?} x tame {:?} on A^{} over F_{}^{} / F_{}^{}",
            self.group.wild_orders,
            self.group.tame_orders,
            self.dimension,
            self.p(),
            self.tower.degree(self.field_level),
            self.p(),
            self.base_degree()
        )?;
        for (i, g) in self.generators.iter().enumerate() {
            write!(f, "  g{i} (order {}, twist {}):", g.declared_order, g.datum.twist)?;
            for r in 0..self.dimension {
                let terms: Vec<String> = (0..self.dimension)
                    .filter(|&c| !g.datum.matrix[r][c].is_zero())
                    .map(|c| format!("({})x{}", g.datum.matrix[r][c], c + 1))
                    .collect();
                write!(f, " x{} -> {} + ({});", r + 1, terms.join(" + "), g.datum.translation[r])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
