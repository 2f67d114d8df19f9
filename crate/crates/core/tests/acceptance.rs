//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Run with
//! `cargo test -p kvar --test acceptance`.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kvar::action::{
    AbelianGroupSpec, AffineDatum, ActionError, SemiLinearAffineAction, SemiLinearAffineGenerator, CHECK_COMMUTE, CHECK_ROOTS, CHECK_TWISTS,
};
use kvar::catalog;
use kvar::gfq::FieldTower;
use kvar::jinv::j_invariant;
use kvar::mclass::{parse_class, LefschetzPoly, Monomial, MotivicClass, RealizationSpec, RingTag, Session, UvPoly};
use kvar::nearby::{blowup_step_identity, congruence_check, nearby_fiber_quotient, BlowupStep, ExceptionalFiber, SncModel};
use kvar::quotient::{
    invariant_check, invariant_ring_d1, orbit_count_oracle, presented_count, quotient_class, MPoly, OracleBudget, OracleMode, QuotientError,
    StepKind,
};
use kvar::Class;

/// Seed for every randomized criterion.
const SEED: u64 = 0x6b76_6172;
/// Criterion 1 wall-clock limit.
const CATALOG_LIMIT: Duration = Duration::from_secs(60);
/// Criterion 5 wall-clock limit.
const GALLERY_LIMIT: Duration = Duration::from_secs(5);
/// Criterion 4: samples with b²/a³ outside F_p, per characteristic.
const J_SAMPLES: usize = 10;
/// Criterion 6: random center/ambient pairs.
const BLOWUP_PAIRS: usize = 100;
/// Criterion 8: cases per property.
const PROPERTY_CASES: u32 = 1000;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let entries = catalog::actions();
    let budget = OracleBudget::default();
    ensure(entries.len() >= 20, || format!("only {} actions", entries.len()))?;
    let mut branches = BTreeSet::new();
    let mut twisted = 0;
    for e in &entries {
        let a = &e.action;
        let g = a.group();
        ensure(g.order() <= 6 && g.orders().iter().all(|o| [2, 3, 4, 5].contains(o)), || format!("{}: group {:?}", e.name, g.orders()))?;
        ensure([1, 2].contains(&a.dimension()), || format!("{}: dimension {}", e.name, a.dimension()))?;
        ensure([2, 3, 4, 5].contains(&a.q()) && [1, 2].contains(&a.n()), || format!("{}: q={} n={}", e.name, a.q(), a.n()))?;
        twisted += usize::from(a.n() > 1);
        if a.dimension() == 1 && !g.is_tame() {
            let r = invariant_ring_d1(a).map_err(|err| format!("{}: {err}", e.name))?;
            branches.extend(r.trace.kinds());
        }
        let q = BigUint::from(a.q());
        for m in 1..=2u32 {
            let c = orbit_count_oracle(a, m, OracleMode::Burnside, &budget).map_err(|err| format!("{}: {err}", e.name))?;
            ensure(c == q.pow(m * a.dimension() as u32), || format!("{} m={m}: {c} orbits", e.name))?;
        }
    }
    for b in [StepKind::CaseBZero, StepKind::CaseFrobeniusTrivial, StepKind::CaseArtinSchreier] {
        ensure(branches.contains(&b), || format!("no wild action reaches {}", b.name()))?;
    }
    ensure(twisted >= 3, || format!("only {twisted} twisted actions"))?;
    let t = start.elapsed();
    ensure(t < CATALOG_LIMIT, || format!("took {t:?}"))?;
    Ok(format!("{} actions, {twisted} twisted, all three wild branches, {t:.2?}", entries.len()))
}

fn criterion_2() -> Verdict {
    let budget = OracleBudget::default();
    for p in [2u32, 3, 5] {
        let e = catalog::actions().into_iter().find(|e| e.name == format!("f{p}_exinsep")).ok_or("exinsep missing")?;
        let a = &e.action;
        let f = a.field();
        let x = MPoly::parse(f, 2, &format!("x^{p} + {}*x*y^{}", p - 1, p - 1)).map_err(|s| s.to_string())?;
        let y = MPoly::parse(f, 2, "y").map_err(|s| s.to_string())?;
        ensure(invariant_check(&x, a) && invariant_check(&y, a), || format!("p={p}: not invariant"))?;
        // Pointwise: the polynomial takes equal values on (u, v) and (u + v, v).
        for u in f.elements() {
            for v in f.elements() {
                let moved = [f.add(&u, &v), v.clone()];
                ensure(x.eval(f, &[u.clone(), v.clone()]) == x.eval(f, &moved), || format!("p={p}: pointwise failure"))?;
            }
        }
        for m in 1..=2u32 {
            let c = orbit_count_oracle(a, m, OracleMode::Burnside, &budget).map_err(|err| err.to_string())?;
            ensure(c == BigUint::from(p).pow(2 * m), || format!("p={p} m={m}: {c}"))?;
        }
    }
    Ok("p = 2, 3, 5".into())
}

fn criterion_3() -> Verdict {
    let budget = OracleBudget::default();
    let mut n = 0;
    for e in catalog::actions().into_iter().filter(|e| e.action.dimension() == 1) {
        let a = &e.action;
        let r = invariant_ring_d1(a).map_err(|err| format!("{}: {err}", e.name))?;
        ensure(invariant_check(&r.generator_mpoly(a.field()), a), || format!("{}: generator not invariant", e.name))?;
        r.replay(a).map_err(|err| format!("{}: {err}", e.name))?;
        for m in 1..=2u32 {
            let pc = presented_count(a, &r, m, &budget).map_err(|err| format!("{}: {err}", e.name))?;
            let oracle = orbit_count_oracle(a, m, OracleMode::Burnside, &budget).map_err(|err| err.to_string())?;
            ensure(pc.consistent() && pc.presented == oracle, || format!("{} m={m}: {pc:?} vs {oracle}", e.name))?;
        }
        n += 1;
    }
    Ok(format!("{n} one-dimensional actions"))
}

fn criterion_4() -> Verdict {
    let mut summary = Vec::new();
    for p in [5u32, 7] {
        let t = FieldTower::new(p, &[2]).map_err(|e| e.to_string())?;
        let f = t.level(0);
        let size = u128::from(p * p);
        let in_fp = |z: &kvar::gfq::FieldElement| f.pow(z, u64::from(p)) == *z;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ u64::from(p));
        let (mut outside, mut inside) = (0, 0);
        let mut draws = 0;
        while (outside < J_SAMPLES || inside < J_SAMPLES) && draws < 100_000 {
            draws += 1;
            // Alternate free draws with (s², c·s³), whose ratio c² lies in F_p.
            let (a, b) = if draws % 2 == 0 {
                (f.from_index(rng.gen_range(1..size)), f.from_index(rng.gen_range(0..size)))
            } else {
                let s = f.from_index(rng.gen_range(1..size));
                let c = f.from_int(rng.gen_range(0..i64::from(p)));
                (f.mul(&s, &s), f.mul(&c, &f.pow(&s, 3)))
            };
            let Some(j) = j_invariant(f, &a, &b) else { continue };
            let a_tw = f.pow(&a, u64::from(p));
            let b_tw = f.pow(&b, u64::from(p));
            let Some(j_tw) = j_invariant(f, &a_tw, &b_tw) else { return Err(format!("p={p}: twist is singular")) };
            let ratio = f.div(&f.mul(&b, &b), &f.pow(&a, 3)).ok_or("a = 0")?;
            if in_fp(&ratio) {
                ensure(j == j_tw, || format!("p={p}: ratio in F_p but j differs"))?;
                inside += 1;
            } else {
                ensure(j != j_tw, || format!("p={p}: ratio outside F_p but j agrees"))?;
                outside += 1;
            }
        }
        ensure(outside >= J_SAMPLES && inside >= J_SAMPLES, || format!("p={p}: {outside}/{inside} samples"))?;
        summary.push(format!("p={p}: {outside} separated, {inside} equal"));
    }
    Ok(summary.join("; "))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let models = catalog::models();
    let mutated = catalog::mutated_models();
    ensure(models.len() >= 5 && mutated.len() >= 5, || format!("{} models, {} mutated", models.len(), mutated.len()))?;
    for (name, doc) in &models {
        let m = SncModel::<BigInt>::from_doc(doc).map_err(|e| format!("{name}: {e}"))?;
        let c = congruence_check(&m).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.holds, || format!("{name}: {c}"))?;
        if *name == "xy2.json" {
            let sq = nearby_fiber_quotient(&m).map_err(|e| e.to_string())?;
            let expected: Class = parse_class(sq.tag(), "L - 1").map_err(|e| e.to_string())?;
            ensure(sq == expected, || format!("x*y^2: S_f/mu = {sq}"))?;
            let minus_one: Class = parse_class(c.reduction.tag(), "-1").map_err(|e| e.to_string())?;
            ensure(c.reduction == minus_one, || format!("x*y^2: R(f) = {}", c.reduction))?;
        }
    }
    for (name, doc) in &mutated {
        let m = SncModel::<BigInt>::from_doc(doc).map_err(|e| format!("{name}: {e}"))?;
        let c = congruence_check(&m).map_err(|e| format!("{name}: {e}"))?;
        ensure(!c.holds && c.witness.is_some(), || format!("{name}: mutation not detected"))?;
    }
    let t = start.elapsed();
    ensure(t < GALLERY_LIMIT, || format!("took {t:?}"))?;
    Ok(format!("{} models congruent, {} mutations caught, {t:.2?}", models.len(), mutated.len()))
}

fn random_class(rng: &mut ChaCha8Rng) -> Class {
    let terms: Vec<_> = (0..rng.gen_range(1..4))
        .map(|_| {
            let mono = Monomial::from_powers(["A", "B"].iter().map(|s| (s.to_string(), rng.gen_range(0..3))).filter(|(_, e)| *e > 0));
            let poly = LefschetzPoly::from_terms((0..rng.gen_range(1..3)).map(|_| (rng.gen_range(0..4), BigInt::from(rng.gen_range(-5i64..=5)))));
            (mono, poly)
        })
        .collect();
    MotivicClass::from_terms(RingTag::K0, terms).expect("nonnegative exponents")
}

fn criterion_6() -> Verdict {
    let l = MotivicClass::<BigInt>::lefschetz(RingTag::K0);
    let hd = l.realize(&RealizationSpec::<UvPoly>::hodge_deligne()).map_err(|e| e.to_string())?;
    ensure(hd == UvPoly::uv(), || format!("HD(L) = {hd}"))?;
    for q in [2u64, 3, 5] {
        for n in 0..=5u32 {
            let v = MotivicClass::<BigInt>::projective_space(RingTag::K0, n).realize(&RealizationSpec::point_count(q)).map_err(|e| e.to_string())?;
            let expected = (BigInt::from(q).pow(n + 1) - 1) / BigInt::from(q - 1);
            ensure(v == expected, || format!("[P^{n}] at q={q}: {v}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..BLOWUP_PAIRS {
        let step = BlowupStep { codim: (i % 8) as u32 + 1, center_class: random_class(&mut rng), ambient_class: random_class(&mut rng) };
        ensure(blowup_step_identity(&step, ExceptionalFiber::Codim).map_err(|e| e.to_string())?, || format!("blowup pair {i} fails"))?;
    }
    Ok(format!("HD(L) = uv, [P^n] for n <= 5, {BLOWUP_PAIRS} blowup pairs"))
}

fn gen(twist: u32, matrix: Vec<Vec<kvar::gfq::FieldElement>>, translation: Vec<kvar::gfq::FieldElement>, order: u64) -> SemiLinearAffineGenerator {
    SemiLinearAffineGenerator { datum: AffineDatum { twist, matrix, translation }, declared_order: order }
}

fn criterion_7() -> Verdict {
    let t5 = Arc::new(FieldTower::new(5, &[1]).map_err(|e| e.to_string())?);
    let f5 = t5.level(0);
    let non_commuting = SemiLinearAffineAction::new(
        t5.clone(),
        0,
        0,
        AbelianGroupSpec::new(vec![5], vec![4]),
        1,
        vec![gen(0, vec![vec![f5.one()]], vec![f5.one()], 5), gen(0, vec![vec![f5.from_int(2)]], vec![f5.zero()], 4)],
    )
    .map_err(|e| e.to_string())?;
    let t3 = Arc::new(FieldTower::new(3, &[1]).map_err(|e| e.to_string())?);
    let f3 = t3.level(0);
    // 4 does not divide 3 − 1; the generator still has order 4 as a map of A^2.
    let z = f3.zero();
    let swap_neg = vec![vec![z.clone(), f3.one()], vec![f3.from_int(-1), z.clone()]];
    let bad_tame = SemiLinearAffineAction::new(t3, 0, 0, AbelianGroupSpec::new(vec![], vec![4]), 2, vec![gen(0, swap_neg, vec![z.clone(), z], 4)])
        .map_err(|e| e.to_string())?;
    let t4 = Arc::new(FieldTower::new(2, &[1, 2]).map_err(|e| e.to_string())?);
    let f4 = t4.level(1);
    let untwisted = SemiLinearAffineAction::new(t4.clone(), 0, 1, AbelianGroupSpec::new(vec![2], vec![]), 1, vec![gen(0, vec![vec![f4.one()]], vec![f4.one()], 2)])
        .map_err(|e| e.to_string())?;
    for (label, a, check) in [("non-commuting", &non_commuting, CHECK_COMMUTE), ("tame order 4 over F_3", &bad_tame, CHECK_ROOTS), ("untwisted F_4/F_2", &untwisted, CHECK_TWISTS)] {
        let names = a.validate().failed_check_names();
        ensure(names == vec![check.to_string()], || format!("{label}: failed checks {names:?}"))?;
        let refused = matches!(quotient_class::<BigInt>(a), Err(QuotientError::Action(ActionError::HypothesisViolation(_))));
        ensure(refused, || format!("{label}: quotient_class ran"))?;
    }
    Ok(format!("{CHECK_COMMUTE}, {CHECK_ROOTS}, {CHECK_TWISTS} each reported and refused"))
}

fn class_strategy() -> impl Strategy<Value = Class> {
    let mono = prop::collection::vec(0u32..3, 3)
        .prop_map(|es| Monomial::from_powers(["A", "B", "C"].iter().zip(es).filter(|(_, e)| *e > 0).map(|(s, e)| (s.to_string(), e))));
    let poly = prop::collection::vec((0i32..4, -6i64..=6), 0..4).prop_map(|ts| LefschetzPoly::from_terms(ts.into_iter().map(|(e, c)| (e, BigInt::from(c)))));
    prop::collection::vec((mono, poly), 0..4).prop_map(|ts| MotivicClass::from_terms(RingTag::K0, ts).unwrap())
}

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: PROPERTY_CASES, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() })
}

fn criterion_8() -> Verdict {
    let c = class_strategy;
    runner()
        .run(&(c(), c(), c()), |(a, b, x)| {
            let u = |r: Result<Class, _>| r.unwrap();
            prop_assert_eq!(u(a.add(&b)), u(b.add(&a)));
            prop_assert_eq!(u(a.mul(&b)), u(b.mul(&a)));
            prop_assert_eq!(u(u(a.add(&b)).add(&x)), u(a.add(&u(b.add(&x)))));
            prop_assert_eq!(u(u(a.mul(&b)).mul(&x)), u(a.mul(&u(b.mul(&x)))));
            prop_assert_eq!(u(a.mul(&u(b.add(&x)))), u(u(a.mul(&b)).add(&u(a.mul(&x)))));
            Ok(())
        })
        .map_err(|e| format!("ring laws: {e}"))?;
    runner()
        .run(&(c(), c(), prop::sample::select(vec![2u64, 3, 4, 5, 7, 9])), |(a, b, q)| {
            let pc = RealizationSpec::<BigInt>::point_count(q).with_symbol("A", BigInt::from(q + 1)).with_symbol("B", BigInt::from(-2)).with_symbol("C", BigInt::from(7));
            let (ra, rb) = (a.realize(&pc).unwrap(), b.realize(&pc).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().realize(&pc).unwrap(), &ra + &rb);
            prop_assert_eq!(a.mul(&b).unwrap().realize(&pc).unwrap(), &ra * &rb);
            let hd = RealizationSpec::<UvPoly>::hodge_deligne()
                .with_symbol("A", UvPoly::uv())
                .with_symbol("B", UvPoly::monomial(1, 0, BigInt::from(3)))
                .with_symbol("C", UvPoly::monomial(0, 2, BigInt::from(-1)));
            let (ha, hb) = (a.realize(&hd).unwrap(), b.realize(&hd).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().realize(&hd).unwrap(), ha.clone() + hb.clone());
            prop_assert_eq!(a.mul(&b).unwrap().realize(&hd).unwrap(), ha * hb);
            Ok(())
        })
        .map_err(|e| format!("realize: {e}"))?;
    runner()
        .run(&(c(), c()), |(a, rule)| {
            let mut s = Session::<BigInt>::new();
            let rule = rule.substitute("B", &MotivicClass::one(RingTag::K0)).unwrap();
            s.define("B", rule).unwrap();
            s.define("C", MotivicClass::lefschetz(RingTag::K0)).unwrap();
            let once = s.canonicalize(&a).unwrap();
            prop_assert_eq!(s.canonicalize(&once).unwrap(), once);
            Ok(())
        })
        .map_err(|e| format!("canonicalization: {e}"))?;
    Ok(format!("{PROPERTY_CASES} cases each for ring laws, realization, canonicalization"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("quotient-class oracle agreement", criterion_1),
        ("exinsep invariants and counts", criterion_2),
        ("d=1 invariant rings", criterion_3),
        ("j-invariant twist separation", criterion_4),
        ("nearby-fiber congruence", criterion_5),
        ("realization identities", criterion_6),
        ("hypothesis enforcement", criterion_7),
        ("ring-law properties", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
