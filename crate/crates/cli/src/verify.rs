//! `verify-catalog`: every bundled action and model through every check,
//! plus seeded samples of the j-invariant and blowup properties.

use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use kvar::action::{ActionDoc, SemiLinearAffineAction};
use kvar::catalog;
use kvar::gfq::FieldTower;
use kvar::jinv::compare_with_twist;
use kvar::mclass::{LefschetzPoly, Monomial, MotivicClass, RealizationSpec, RingTag, UvPoly};
use kvar::nearby::{blowup_step_identity, congruence_check, realize_model, BlowupStep, ExceptionalFiber, ModelDoc, SncModel};
use kvar::quotient::{invariant_check, invariant_ring_d1, orbit_count_oracle, presented_count, quotient_class, OracleMode, StepKind};

use crate::commands::{action_error, nearby_error};
use crate::record::{Record, Status};
use crate::{BudgetArgs, CliError};

const CMD: &str = "verify-catalog";

pub struct VerifyConfig {
    pub actions: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub mutated: Option<PathBuf>,
    pub samples: usize,
    pub seed: u64,
    pub budget: BudgetArgs,
}

struct ActionItem {
    name: String,
    action: SemiLinearAffineAction,
    branches: Vec<StepKind>,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    files.sort();
    Ok(files)
}

fn read(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
}

fn load_actions(cfg: &VerifyConfig) -> Result<Vec<ActionItem>, CliError> {
    let Some(dir) = &cfg.actions else {
        return Ok(catalog::actions().into_iter().map(|e| ActionItem { name: e.name.to_string(), action: e.action, branches: e.branches }).collect());
    };
    json_files(dir)?
        .iter()
        .map(|p| {
            let doc = ActionDoc::from_json(&read(p)?).map_err(|e| action_error(&e))?;
            let action = doc.to_action(cfg.budget.tower()).map_err(|e| action_error(&e))?;
            let name = doc.name.unwrap_or_else(|| p.file_name().unwrap_or_default().to_string_lossy().into_owned());
            Ok(ActionItem { name, action, branches: Vec::new() })
        })
        .collect()
}

fn load_models(dir: &Option<PathBuf>, bundled: fn() -> Vec<(&'static str, ModelDoc)>) -> Result<Vec<(String, ModelDoc)>, CliError> {
    let Some(dir) = dir else {
        return Ok(bundled().into_iter().map(|(n, d)| (n.to_string(), d)).collect());
    };
    json_files(dir)?
        .iter()
        .map(|p| {
            let doc: ModelDoc = serde_json::from_str(&read(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            Ok((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), doc))
        })
        .collect()
}

/// All checks of one action; failures are reported, budget overruns abort.
fn check_action(item: &ActionItem, cfg: &VerifyConfig) -> Result<Record, CliError> {
    let a = &item.action;
    let budget = cfg.budget.oracle();
    let mut r = Record::new(CMD, format!("action {}", item.name), Status::Pass).with("q", a.q()).with("dimension", a.dimension());
    let mut failures: Vec<String> = Vec::new();
    let report = a.validate();
    if !report.is_valid() {
        r.status = Status::Fail;
        return Ok(r.with("failures", report.failed_check_names()));
    }
    match quotient_class::<BigInt>(a) {
        Ok((class, _)) => {
            let tag = if a.group().is_tame() { RingTag::K0 } else { RingTag::K0_MOD };
            if class != MotivicClass::lefschetz(tag).pow(a.dimension() as u32) {
                failures.push(format!("quotient class {class}"));
            }
            r.set("class", class.to_string());
        }
        Err(e) => failures.push(e.to_string()),
    }
    let q = BigUint::from(a.q());
    let mut counts = Vec::new();
    for m in 1..=2u32 {
        let c = orbit_count_oracle(a, m, OracleMode::Burnside, &budget).map_err(|e| crate::commands::quotient_error(&e))?;
        if c != q.pow(m * a.dimension() as u32) {
            failures.push(format!("m={m}: {c} orbits"));
        }
        counts.push(c.to_string());
    }
    r.set("counts", counts);
    if a.dimension() == 1 {
        match invariant_ring_d1(a) {
            Ok(res) => {
                let poly = res.generator_mpoly(a.field());
                r.set("generator", poly.to_string());
                if !invariant_check(&poly, a) {
                    failures.push("generator not invariant".into());
                }
                if let Err(e) = res.replay(a) {
                    failures.push(e.to_string());
                }
                for b in &item.branches {
                    if !res.trace.contains(*b) {
                        failures.push(format!("trace lacks {}", b.name()));
                    }
                }
                for m in 1..=2u32 {
                    let pc = presented_count(a, &res, m, &budget).map_err(|e| crate::commands::quotient_error(&e))?;
                    if !pc.consistent() || pc.presented != q.pow(m) {
                        failures.push(format!("presented count m={m}"));
                    }
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        r.status = Status::Fail;
        r.set("failures", failures);
    }
    Ok(r)
}

fn check_model(name: &str, doc: &ModelDoc, expect_congruent: bool) -> Result<Record, CliError> {
    let kind = if expect_congruent { "model" } else { "mutated" };
    let m = SncModel::<BigInt>::from_doc(doc).map_err(|e| nearby_error(&e))?;
    let c = congruence_check(&m).map_err(|e| nearby_error(&e))?;
    let mut r = Record::new(CMD, format!("{kind} {name}"), Status::Pass).with("congruent", c.holds);
    let mut ok = c.holds == expect_congruent;
    if let Some(w) = &c.witness {
        r.set("witness", w.to_string());
    }
    if expect_congruent {
        let hd = realize_model(&m, &RealizationSpec::<UvPoly>::hodge_deligne()).map_err(|e| nearby_error(&e))?;
        ok &= hd.assembly_holds && hd.congruent && hd.one_mod_l_shadow != Some(false);
        for q in [2u64, 3, 5] {
            let pc = realize_model(&m, &RealizationSpec::<BigInt>::point_count(q)).map_err(|e| nearby_error(&e))?;
            ok &= pc.assembly_holds && pc.congruent;
        }
        r.set("R(f)", c.reduction.to_string());
    }
    if !ok {
        r.status = Status::Fail;
    }
    Ok(r)
}

fn jinv_samples(p: u32, samples: usize, seed: u64) -> Record {
    let tower = FieldTower::new(p, &[2]).expect("small tower");
    let f = tower.level(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(p));
    let size = (p * p) as u128;
    let (mut checked, mut separated, mut bad) = (0usize, 0usize, 0usize);
    while checked < samples {
        let a = f.from_index(rng.gen_range(1..size));
        let b = f.from_index(rng.gen_range(0..size));
        let Some(c) = compare_with_twist(f, &a, &b) else { continue };
        checked += 1;
        separated += usize::from(!c.same_j());
        bad += usize::from(!c.consistent() || c.j_twist != f.frob(&c.j, 1));
    }
    Record::new(CMD, format!("j-invariant twist F_{}", p * p), if bad == 0 { Status::Pass } else { Status::Fail })
        .with("samples", checked)
        .with("distinct_j", separated)
        .with("inconsistent", bad)
}

fn random_class(rng: &mut ChaCha8Rng) -> MotivicClass<BigInt> {
    let symbols = ["A", "B"];
    let terms = (0..rng.gen_range(1..4)).map(|_| {
        let mono = Monomial::from_powers(symbols.iter().map(|s| (s.to_string(), rng.gen_range(0..3))).filter(|(_, e)| *e > 0));
        let poly = LefschetzPoly::from_terms((0..rng.gen_range(1..3)).map(|_| (rng.gen_range(0..4), BigInt::from(rng.gen_range(-5i64..=5)))));
        (mono, poly)
    });
    MotivicClass::from_terms(RingTag::K0, terms.collect::<Vec<_>>()).expect("nonnegative exponents")
}

fn blowup_samples(samples: usize, seed: u64) -> Result<Record, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut bad = 0;
    for _ in 0..samples {
        let step = BlowupStep { codim: rng.gen_range(1..=8), center_class: random_class(&mut rng), ambient_class: random_class(&mut rng) };
        for fiber in [ExceptionalFiber::Codim, ExceptionalFiber::CodimMinusOne] {
            if step.codim == 1 && fiber == ExceptionalFiber::CodimMinusOne {
                continue;
            }
            if !blowup_step_identity(&step, fiber).map_err(|e| nearby_error(&e))? {
                bad += 1;
            }
        }
    }
    Ok(Record::new(CMD, "blowup invariance mod L", if bad == 0 { Status::Pass } else { Status::Fail }).with("samples", samples).with("violations", bad))
}

pub fn verify_catalog(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let actions = load_actions(cfg)?;
    let models = load_models(&cfg.models, catalog::models)?;
    let mutated = load_models(&cfg.mutated, catalog::mutated_models)?;
    let mut out: Vec<Record> = actions.par_iter().map(|a| check_action(a, cfg)).collect::<Result<_, _>>()?;
    for (n, d) in &models {
        out.push(check_model(n, d, true)?);
    }
    for (n, d) in &mutated {
        out.push(check_model(n, d, false)?);
    }
    out.push(jinv_samples(5, cfg.samples, cfg.seed));
    out.push(jinv_samples(7, cfg.samples, cfg.seed));
    out.push(blowup_samples(cfg.samples, cfg.seed)?);
    Ok(out)
}
