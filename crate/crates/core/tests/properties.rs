use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use kvar::action::{AffineDatum, SemiLinearAffineAction};
use kvar::catalog;
use kvar::gfq::FieldTower;
use kvar::mclass::{LefschetzPoly, Monomial, MotivicClass, RealizationSpec, RingTag, Session, UvPoly};
use kvar::nearby::{blowup_step_identity, stratum_gcd, BlowupStep, ExceptionalFiber};
use kvar::quotient::{quotient_homomorphism, QuotientRules};
use kvar::Class;

const SYMBOLS: [&str; 3] = ["A", "B", "C"];

fn config() -> ProptestConfig {
    // Fixed seed so a run is reproducible; PROPTEST_RNG_SEED is ignored.
    ProptestConfig { cases: 1000, rng_seed: RngSeed::Fixed(0x6b76_6172), ..ProptestConfig::default() }
}

fn monomial() -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0u32..3, SYMBOLS.len())
        .prop_map(|es| Monomial::from_powers(SYMBOLS.iter().zip(es).filter(|(_, e)| *e > 0).map(|(s, e)| (s.to_string(), e))))
}

fn lpoly(min_exp: i32) -> impl Strategy<Value = LefschetzPoly<BigInt>> {
    prop::collection::vec((min_exp..4, -6i64..=6), 0..4).prop_map(|ts| LefschetzPoly::from_terms(ts.into_iter().map(|(e, c)| (e, BigInt::from(c)))))
}

fn class_with(tag: RingTag) -> impl Strategy<Value = Class> {
    let min_exp = if tag.is_localized() { -2 } else { 0 };
    prop::collection::vec((monomial(), lpoly(min_exp)), 0..4).prop_map(move |ts| MotivicClass::from_terms(tag, ts).unwrap())
}

fn class() -> impl Strategy<Value = Class> {
    class_with(RingTag::K0)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ring_laws(a in class(), b in class(), c in class()) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert!(a.sub(&a).unwrap().is_zero());
        prop_assert_eq!(a.mul(&MotivicClass::one(RingTag::K0)).unwrap(), a.clone());
    }

    #[test]
    fn localized_ring_laws(a in class_with(RingTag::M), b in class_with(RingTag::M)) {
        let l = MotivicClass::lefschetz(RingTag::M);
        let l_inv = MotivicClass::lefschetz_pow(RingTag::M, -1).unwrap();
        prop_assert_eq!(l.mul(&l_inv).unwrap(), MotivicClass::one(RingTag::M));
        prop_assert_eq!(a.mul(&b).unwrap().mul(&l).unwrap().mul(&l_inv).unwrap(), a.mul(&b).unwrap());
    }

    #[test]
    fn point_count_is_a_homomorphism(a in class(), b in class(), q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9])) {
        let spec = SYMBOLS.iter().enumerate().fold(RealizationSpec::<BigInt>::point_count(q), |s, (i, n)| s.with_symbol(n, BigInt::from(i as i64 * 3 - 2)));
        let (ra, rb) = (a.realize(&spec).unwrap(), b.realize(&spec).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().realize(&spec).unwrap(), &ra + &rb);
        prop_assert_eq!(a.mul(&b).unwrap().realize(&spec).unwrap(), &ra * &rb);
    }

    #[test]
    fn hodge_deligne_is_a_homomorphism(a in class(), b in class()) {
        let spec = RealizationSpec::<UvPoly>::hodge_deligne()
            .with_symbol("A", UvPoly::uv() + (-UvPoly::monomial(0, 0, BigInt::from(1))))
            .with_symbol("B", UvPoly::monomial(1, 0, BigInt::from(2)))
            .with_symbol("C", UvPoly::monomial(0, 1, BigInt::from(-1)));
        let (ra, rb) = (a.realize(&spec).unwrap(), b.realize(&spec).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().realize(&spec).unwrap(), ra.clone() + rb.clone());
        prop_assert_eq!(a.mul(&b).unwrap().realize(&spec).unwrap(), ra * rb);
    }

    #[test]
    fn reduction_mod_l_commutes_with_ring_ops(a in class(), b in class()) {
        let sum = a.add(&b).unwrap().mod_l().unwrap();
        prop_assert_eq!(sum, a.mod_l().unwrap().add(&b.mod_l().unwrap()).unwrap());
        let prod = a.mul(&b).unwrap().mod_l().unwrap();
        prop_assert_eq!(prod, a.mod_l().unwrap().mul(&b.mod_l().unwrap()).unwrap());
    }

    #[test]
    fn canonicalization_is_idempotent(a in class(), rule_c in lpoly(0), rule_b in class()) {
        let mut s = Session::<BigInt>::new();
        for n in SYMBOLS {
            s.declare_plain(n, "").unwrap();
        }
        // C := polynomial in L, B := class possibly mentioning A and C.
        s.define("C", MotivicClass::from_poly(RingTag::K0, rule_c).unwrap()).unwrap();
        let rule_b = rule_b.substitute("B", &MotivicClass::symbol(RingTag::K0, "A")).unwrap();
        s.define("B", rule_b).unwrap();
        let once = s.canonicalize(&a).unwrap();
        prop_assert_eq!(s.canonicalize(&once).unwrap(), once.clone());
        prop_assert!(once.symbols().iter().all(|x| x == "A"));
        prop_assert!(s.equal(&a, &once).unwrap());
    }

    #[test]
    fn stratum_gcd_is_multiplicative_over_unions(ns in prop::collection::vec(1u32..60, 1..8), mask_a in 1u32..256, mask_b in 1u32..256) {
        let n = ns.len();
        let pick = |mask: u32| -> Vec<usize> { (0..n).filter(|i| mask >> i & 1 == 1).collect() };
        let (i, j) = (pick(mask_a), pick(mask_b));
        prop_assume!(!i.is_empty() && !j.is_empty());
        let mut u: Vec<usize> = i.iter().chain(&j).copied().collect();
        u.sort();
        u.dedup();
        let (gi, gj, gu) = (stratum_gcd(&ns, &i), stratum_gcd(&ns, &j), stratum_gcd(&ns, &u));
        prop_assert_eq!(gu, num_integer::gcd(gi, gj));
        for &k in &i {
            prop_assert_eq!(ns[k] % gi, 0);
        }
        // Refining the stratum can only shrink m_I.
        prop_assert_eq!(gi % gu, 0);
    }

    #[test]
    fn blowup_invariance_mod_l(codim in 1u32..=8, center in class(), ambient in class()) {
        let step = BlowupStep { codim, center_class: center, ambient_class: ambient };
        prop_assert!(blowup_step_identity(&step, ExceptionalFiber::Codim).unwrap());
        if codim >= 2 {
            prop_assert!(blowup_step_identity(&step, ExceptionalFiber::CodimMinusOne).unwrap());
        }
    }

    #[test]
    fn quotient_homomorphism_is_additive(a in class(), b in class(), img in class()) {
        let tag = RingTag::k0_eq(2);
        // Make A the only acted symbol and keep it to degree at most one.
        let lin = |c: &Class| -> Class {
            let t = c.terms().map(|(m, p)| (Monomial::from_powers(m.powers().map(|(s, e)| (s.to_string(), if s == "A" { e.min(1) } else { e }))), p.clone()));
            MotivicClass::from_terms(tag, t.collect::<Vec<_>>()).unwrap()
        };
        let (a, b) = (lin(&a), lin(&b));
        let img = img.substitute("A", &MotivicClass::one(RingTag::K0)).unwrap();
        let rules = QuotientRules::new(false).with_rule("A", img);
        let qa = quotient_homomorphism(&a, &rules).unwrap();
        let qb = quotient_homomorphism(&b, &rules).unwrap();
        prop_assert_eq!(qa.tag(), RingTag::K0);
        prop_assert_eq!(quotient_homomorphism(&a.add(&b).unwrap(), &rules).unwrap(), qa.add(&qb).unwrap());
        prop_assert_eq!(quotient_homomorphism(&a.neg(), &rules).unwrap(), qa.neg());
    }
}

fn twisted_actions() -> Vec<SemiLinearAffineAction> {
    catalog::actions().into_iter().filter(|e| e.action.n() > 1).map(|e| e.action).collect()
}

fn datum(a: &SemiLinearAffineAction, seed: &[u64]) -> AffineDatum {
    let f = a.field();
    let size = f.size_u128().unwrap();
    let d = a.dimension();
    let mut it = seed.iter().map(|&s| f.from_index(s as u128 % size));
    let matrix = (0..d).map(|_| (0..d).map(|_| it.next().unwrap()).collect()).collect();
    let translation = (0..d).map(|_| it.next().unwrap()).collect();
    AffineDatum { twist: (seed[seed.len() - 1] % a.n() as u64) as u32, matrix, translation }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn composition_is_associative(which in 0usize..64, s1 in prop::collection::vec(any::<u64>(), 7), s2 in prop::collection::vec(any::<u64>(), 7), s3 in prop::collection::vec(any::<u64>(), 7)) {
        let actions = twisted_actions();
        let a = &actions[which % actions.len()];
        let (g1, g2, g3) = (datum(a, &s1), datum(a, &s2), datum(a, &s3));
        let left = a.compose(&a.compose(&g1, &g2), &g3);
        let right = a.compose(&g1, &a.compose(&g2, &g3));
        prop_assert_eq!(left, right);
        prop_assert_eq!(a.compose(&g1, &a.identity_datum()), g1.clone());
        prop_assert_eq!(a.compose(&a.identity_datum(), &g1), g1);
    }

    #[test]
    fn powers_add(which in 0usize..64, s in prop::collection::vec(any::<u64>(), 7), e1 in 0u64..20, e2 in 0u64..20) {
        let actions = twisted_actions();
        let a = &actions[which % actions.len()];
        let g = datum(a, &s);
        prop_assert_eq!(a.power(&g, e1 + e2), a.compose(&a.power(&g, e1), &a.power(&g, e2)));
    }

    #[test]
    fn frobenius_is_a_field_automorphism(p in prop::sample::select(vec![2u32, 3, 5, 7]), n in 1usize..5, x in any::<u64>(), y in any::<u64>(), s in 0usize..6) {
        let t = FieldTower::new(p, &[n]).unwrap();
        let f = t.level(0);
        let size = f.size_u128().unwrap();
        let (a, b) = (f.from_index(x as u128 % size), f.from_index(y as u128 % size));
        prop_assert_eq!(f.frob(&f.add(&a, &b), s), f.add(&f.frob(&a, s), &f.frob(&b, s)));
        prop_assert_eq!(f.frob(&f.mul(&a, &b), s), f.mul(&f.frob(&a, s), &f.frob(&b, s)));
        prop_assert_eq!(f.frob(&a, n), a.clone());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
        }
    }
}
