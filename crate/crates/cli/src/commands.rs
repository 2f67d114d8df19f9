//! One function per subcommand; each returns the records to print.

use std::path::Path;

use num_bigint::BigInt;

use kvar::action::{ActionDoc, ActionError, SemiLinearAffineAction};
use kvar::catalog;
use kvar::quotient;
use kvar::gfq::{FieldTower, GfError};
use kvar::mclass::{parse_class, MclassError, RealizationSpec, RealizationTarget, RingTag, UvPoly};
use kvar::nearby::{self, nearby_fiber_quotient, realize_model, NearbyError, SncModel};
use kvar::quotient::{invariant_check, invariant_ring_d1, orbit_count_oracle, presented_count, OracleMode, QuotientError};
use kvar::Class;

use crate::record::{Record, Status};
use crate::{BudgetArgs, CliError};

pub(crate) fn gf_error(e: &GfError) -> CliError {
    match e {
        GfError::CharacteristicTooLarge { .. } | GfError::DegreeTooLarge { .. } => CliError::Budget(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    }
}

pub(crate) fn action_error(e: &ActionError) -> CliError {
    match e {
        ActionError::Field(g) => gf_error(g),
        ActionError::Parse(_) | ActionError::Malformed(_) => CliError::Parse(e.to_string()),
        _ => CliError::Failed(e.to_string()),
    }
}

pub(crate) fn quotient_error(e: &QuotientError) -> CliError {
    match e {
        QuotientError::BudgetExceeded { .. } | QuotientError::EnumerationTooLarge { .. } => CliError::Budget(e.to_string()),
        QuotientError::Action(a) => action_error(a),
        QuotientError::Field(g) => gf_error(g),
        QuotientError::Class(MclassError::Parse(_)) => CliError::Parse(e.to_string()),
        _ => CliError::Failed(e.to_string()),
    }
}

pub(crate) fn nearby_error(e: &NearbyError) -> CliError {
    match e {
        NearbyError::ModelInvalid(_) | NearbyError::Parse(_) | NearbyError::Class(MclassError::Parse(_)) => CliError::Parse(e.to_string()),
        NearbyError::Quotient(q) => quotient_error(q),
        _ => CliError::Failed(e.to_string()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub(crate) fn load_action(path: &Path, budget: &BudgetArgs) -> Result<(String, SemiLinearAffineAction), CliError> {
    let doc = ActionDoc::from_json(&read(path)?).map_err(|e| action_error(&e))?;
    let name = doc.name.clone().unwrap_or_else(|| path.display().to_string());
    let a = doc.to_action(budget.tower()).map_err(|e| action_error(&e))?;
    Ok((name, a))
}

pub(crate) fn load_model(path: &Path) -> Result<(String, SncModel<BigInt>), CliError> {
    let m = SncModel::<BigInt>::from_json(&read(path)?).map_err(|e| nearby_error(&e))?;
    let name = if m.name.is_empty() { path.display().to_string() } else { m.name.clone() };
    Ok((name, m))
}

pub fn quotient_class_record(name: &str, a: &SemiLinearAffineAction, emit_trace: bool) -> Result<Record, CliError> {
    let (class, trace) = quotient::quotient_class::<BigInt>(a).map_err(|e| quotient_error(&e))?;
    let mut r = Record::new("quotient-class", name, Status::Info)
        .with("class", class.to_string())
        .with("tag", class.tag().to_string())
        .with("q", a.q())
        .with("dimension", a.dimension())
        .with("steps", trace.kinds().iter().map(|k| k.name()).collect::<Vec<_>>());
    if emit_trace {
        r.set("trace", &trace);
    }
    Ok(r)
}

pub fn quotient_class(path: &Path, emit_trace: bool, budget: &BudgetArgs) -> Result<Vec<Record>, CliError> {
    let (name, a) = load_action(path, budget)?;
    Ok(vec![quotient_class_record(&name, &a, emit_trace)?])
}

pub fn invariant_ring(path: &Path, emit_trace: bool, budget: &BudgetArgs) -> Result<Vec<Record>, CliError> {
    let (name, a) = load_action(path, budget)?;
    let r = invariant_ring_d1(&a).map_err(|e| quotient_error(&e))?;
    let poly = r.generator_mpoly(a.field());
    let invariant = invariant_check(&poly, &a);
    let replay = r.replay(&a);
    let ok = invariant && replay.is_ok();
    let mut rec = Record::new("invariant-ring", name, if ok { Status::Pass } else { Status::Fail })
        .with("generator", poly.to_string())
        .with("invariant_field_degree", r.invariant_field_degree)
        .with("base_degree", r.base_degree)
        .with("invariant", invariant)
        .with("replay", replay.err().map_or_else(|| "ok".to_string(), |e| e.to_string()));
    if emit_trace {
        rec.set("trace", &r.trace);
    }
    Ok(vec![rec])
}

pub fn point_count(path: &Path, ms: &[u32], mode: OracleMode, budget: &BudgetArgs) -> Result<Vec<Record>, CliError> {
    let (name, a) = load_action(path, budget)?;
    if ms.iter().any(|&m| m == 0) {
        return Err(CliError::Parse("--m must be positive".into()));
    }
    let ob = budget.oracle();
    let presented = if a.dimension() == 1 { Some(invariant_ring_d1(&a).map_err(|e| quotient_error(&e))?) } else { None };
    let mut out = Vec::new();
    for &m in ms {
        let count = orbit_count_oracle(&a, m, mode, &ob).map_err(|e| quotient_error(&e))?;
        let expected = num_bigint::BigUint::from(a.q()).pow(m * a.dimension() as u32);
        let mut ok = count == expected;
        let mut r = Record::new("point-count", format!("{name} m={m}"), Status::Info)
            .with("count", count.to_string())
            .with("q^(m*d)", expected.to_string())
            .with("mode", mode);
        if let Some(res) = &presented {
            let pc = presented_count(&a, res, m, &ob).map_err(|e| quotient_error(&e))?;
            ok &= pc.consistent() && pc.presented == count;
            r.set("presented", pc.presented.to_string());
            r.set("presentation_consistent", pc.consistent());
        }
        r.status = if ok { Status::Pass } else { Status::Fail };
        out.push(r);
    }
    Ok(out)
}

pub fn validate_action(path: &Path, budget: &BudgetArgs) -> Result<Vec<Record>, CliError> {
    let (name, a) = load_action(path, budget)?;
    let report = a.validate();
    Ok(report
        .checks
        .iter()
        .map(|c| Record::new("validate-action", format!("{name}: {}", c.check), if c.passed { Status::Pass } else { Status::Fail }).with("detail", &c.detail))
        .collect())
}

pub fn nearby_fiber(path: &Path) -> Result<Vec<Record>, CliError> {
    let (name, m) = load_model(path)?;
    let s = nearby::nearby_fiber(&m).map_err(|e| nearby_error(&e))?;
    let sq = nearby_fiber_quotient(&m).map_err(|e| nearby_error(&e))?;
    Ok(vec![Record::new("nearby-fiber", name, Status::Info)
        .with("S_f", s.to_string())
        .with("S_f_tag", s.tag().to_string())
        .with("S_f/mu", sq.to_string())
        .with("S_f/mu_tag", sq.tag().to_string())
        .with("cover_order", m.cover_order())])
}

pub fn motivic_reduction(path: &Path) -> Result<Vec<Record>, CliError> {
    let (name, m) = load_model(path)?;
    let r = nearby::motivic_reduction(&m).map_err(|e| nearby_error(&e))?;
    Ok(vec![Record::new("motivic-reduction", name, Status::Info).with("R(f)", r.to_string()).with("tag", r.tag().to_string())])
}

pub fn congruence_record(name: &str, m: &SncModel<BigInt>) -> Result<Record, CliError> {
    let c = nearby::congruence_check(m).map_err(|e| nearby_error(&e))?;
    let mut r = Record::new("congruence-check", name, if c.holds { Status::Pass } else { Status::Fail })
        .with("S_f/mu mod L", c.quotient_residue.to_string())
        .with("R(f)", c.reduction.to_string());
    if let Some(w) = &c.witness {
        r.set("witness", w.to_string());
    }
    if !c.cover_mismatches.is_empty() {
        r.set("cover_mismatches", &c.cover_mismatches);
    }
    Ok(r)
}

pub fn congruence_check(path: &Path) -> Result<Vec<Record>, CliError> {
    let (name, m) = load_model(path)?;
    Ok(vec![congruence_record(&name, &m)?])
}

fn check_prime_power(q: u64, budget: &BudgetArgs) -> Result<(), CliError> {
    if q < 2 {
        return Err(CliError::Parse(format!("q = {q} is not a prime power")));
    }
    let p = (2..=q).find(|d| q % d == 0).expect("q has a least divisor");
    let mut r = q;
    let mut n = 0usize;
    while r % p == 0 {
        r /= p;
        n += 1;
    }
    if r != 1 {
        return Err(CliError::Parse(format!("q = {q} is not a prime power")));
    }
    // Confirms the field exists within the configured limits.
    FieldTower::with_limits(p as u32, &[n], budget.tower()).map_err(|e| gf_error(&e))?;
    Ok(())
}

fn polynomial_images<T: RealizationTarget>(symbols: &[String], l: &T) -> Result<Vec<(String, T)>, CliError> {
    let base = RealizationSpec::new(l.clone());
    symbols
        .iter()
        .map(|s| {
            let (name, expr) = s.split_once('=').ok_or_else(|| CliError::Parse(format!("--symbol {s:?} is not NAME=EXPR")))?;
            let class: Class = parse_class(RingTag::K0, expr).map_err(|e| CliError::Parse(format!("--symbol {name}: {e}")))?;
            if !class.symbols().is_empty() {
                return Err(CliError::Parse(format!("--symbol {name}: image must be a polynomial in L")));
            }
            let v = class.realize(&base).map_err(|e| CliError::Parse(e.to_string()))?;
            Ok((name.trim().to_string(), v))
        })
        .collect()
}

fn realize_with<T: RealizationTarget + std::fmt::Display>(
    model: Option<&Path>,
    class: Option<&str>,
    tag: &str,
    mut spec: RealizationSpec<T>,
    symbols: &[String],
    label: &str,
) -> Result<Vec<Record>, CliError> {
    for (n, v) in polynomial_images(symbols, &spec.l_image)? {
        spec = spec.with_symbol(&n, v);
    }
    let class_error = |e: MclassError| match e {
        MclassError::Parse(_) => CliError::Parse(e.to_string()),
        _ => CliError::Failed(e.to_string()),
    };
    if let Some(src) = class {
        let tag: RingTag = tag.parse().map_err(|e: MclassError| CliError::Parse(e.to_string()))?;
        let c: Class = parse_class(tag, src).map_err(class_error)?;
        let v = c.realize(&spec).map_err(class_error)?;
        return Ok(vec![Record::new("realize", src, Status::Info).with("target", label).with("value", v.to_string())]);
    }
    let path = model.expect("clap requires --model or --class");
    let (name, m) = load_model(path)?;
    let r = realize_model(&m, &spec).map_err(|e| nearby_error(&e))?;
    let ok = r.assembly_holds && r.congruent && r.one_mod_l_shadow != Some(false);
    let mut rec = Record::new("realize", name, if ok { Status::Pass } else { Status::Fail })
        .with("target", label)
        .with("S_f/mu", r.nearby_quotient.to_string())
        .with("R(f)", r.reduction.to_string())
        .with("assembled", r.assembled.to_string())
        .with("assembly_holds", r.assembly_holds)
        .with("congruent", r.congruent)
        .with("R(f)_is_1_mod_L", r.reduction_is_one);
    if let Some(g) = &r.generic_fiber {
        rec.set("generic_fiber", g.to_string());
    }
    if let Some(s) = r.one_mod_l_shadow {
        rec.set("one_mod_L_shadow", s);
    }
    Ok(vec![rec])
}

pub fn realize(
    model: Option<&Path>,
    class: Option<&str>,
    tag: &str,
    q: Option<u64>,
    hd: bool,
    symbols: &[String],
    budget: &BudgetArgs,
) -> Result<Vec<Record>, CliError> {
    if model.is_none() && class.is_none() {
        return Err(CliError::Parse("one of --model or --class is required".into()));
    }
    match (q, hd) {
        (Some(q), false) => {
            check_prime_power(q, budget)?;
            realize_with(model, class, tag, RealizationSpec::<BigInt>::point_count(q), symbols, &format!("#F_{q}"))
        }
        (None, true) => realize_with(model, class, tag, RealizationSpec::<UvPoly>::hodge_deligne(), symbols, "HD"),
        _ => Err(CliError::Parse("exactly one of --q or --hd is required".into())),
    }
}

pub fn export_catalog(dir: &Path) -> Result<Vec<Record>, CliError> {
    let io = |e: std::io::Error| CliError::Failed(format!("{}: {e}", dir.display()));
    let mut out = Vec::new();
    for name in catalog::export_actions(&dir.join("actions")).map_err(io)? {
        out.push(Record::new("export-catalog", format!("actions/{name}"), Status::Info));
    }
    for (sub, list) in [("models", catalog::models()), ("models/mutated", catalog::mutated_models())] {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).map_err(io)?;
        for (name, doc) in list {
            std::fs::write(d.join(name), doc.to_json() + "\n").map_err(io)?;
            out.push(Record::new("export-catalog", format!("{sub}/{name}"), Status::Info));
        }
    }
    Ok(out)
}

