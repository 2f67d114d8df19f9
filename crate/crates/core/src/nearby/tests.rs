use num_bigint::BigInt;

use super::*;
use crate::mclass::UvPoly;

type Cl = MotivicClass<BigInt>;

const XY2: &str = include_str!("../../data/models/xy2.json");

fn xy2() -> SncModel<BigInt> {
    SncModel::from_json(XY2).unwrap()
}

fn parse(tag: RingTag, s: &str) -> Cl {
    parse_class(tag, s).unwrap()
}

#[test]
fn xy2_nearby_fiber() {
    let m = xy2();
    assert_eq!(m.cover_order(), 2);
    let s = nearby_fiber(&m).unwrap();
    assert_eq!(s.tag(), RingTag::m_eq(2));
    // (L − 1) + [G~] + (1 − L)
    assert_eq!(s, parse(RingTag::m_eq(2), "[G~]"));
    let q = nearby_fiber_quotient(&m).unwrap();
    assert_eq!(q, parse(RingTag::M, "L - 1"));
    assert_eq!(q, stratum_sum(&m).unwrap());
    let r = motivic_reduction(&m).unwrap();
    assert_eq!(r, Cl::constant(RingTag::K0.residue(), BigInt::from(-1)));
    let c = congruence_check(&m).unwrap();
    assert!(c.holds, "{c}");
    assert!(c.witness.is_none() && c.cover_mismatches.is_empty());
}

#[test]
fn single_component() {
    let doc = r#"{"components":[{"name":"F","N":1}],
        "strata":[{"subset":["F"],"class_E":"[F]","class_E_cover":"[F]","m":1}]}"#;
    let m = SncModel::<BigInt>::from_json(doc).unwrap();
    assert_eq!(nearby_fiber(&m).unwrap(), parse(RingTag::m_eq(1), "[F]"));
    assert_eq!(nearby_fiber_quotient(&m).unwrap(), parse(RingTag::M, "[F]"));
    assert!(congruence_check(&m).unwrap().holds);

    let doc = r#"{"components":[{"name":"F","N":1}],
        "strata":[{"subset":["F"],"class_E":"L^3","class_E_cover":"L^3","m":1}]}"#;
    let m = SncModel::<BigInt>::from_json(doc).unwrap();
    assert!(motivic_reduction(&m).unwrap().is_zero());
}

#[test]
fn all_points_model() {
    // every stratum a point: Σ over nonempty I of (1 − L)^{|I|−1}
    let names = ["A", "B", "C"];
    let mut strata = Vec::new();
    for mask in 1u32..8 {
        let sub: Vec<String> = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| format!("\"{}\"", names[i])).collect();
        strata.push(format!(r#"{{"subset":[{}],"class_E":"1","class_E_cover":"1","m":1}}"#, sub.join(",")));
    }
    let doc = format!(
        r#"{{"components":[{{"name":"A","N":1}},{{"name":"B","N":1}},{{"name":"C","N":1}}],"strata":[{}]}}"#,
        strata.join(",")
    );
    let m = SncModel::<BigInt>::from_json(&doc).unwrap();
    // 3 + 3(1 − L) + (1 − L)^2 = 7 − 5L + L^2
    assert_eq!(nearby_fiber_quotient(&m).unwrap(), parse(RingTag::M, "7 - 5*L + L^2"));
    assert!(congruence_check(&m).unwrap().holds);
}

#[test]
fn corrupted_crossing_is_caught() {
    let mut doc: ModelDoc = serde_json::from_str(XY2).unwrap();
    doc.stratum_mut(&["E1", "E2"]).unwrap().class_e = "2".into();
    doc.total_class = None;
    let m = SncModel::<BigInt>::from_doc(&doc).unwrap();
    let c = congruence_check(&m).unwrap();
    assert!(!c.holds);
    assert_eq!(c.witness, Some(Cl::constant(RingTag::M.residue(), BigInt::from(-1))));
    assert_eq!(c.cover_mismatches.len(), 1);
}

#[test]
fn model_validation() {
    let base: ModelDoc = serde_json::from_str(XY2).unwrap();

    let mut d = base.clone();
    d.stratum_mut(&["E2"]).unwrap().m = 1;
    assert!(matches!(SncModel::<BigInt>::from_doc(&d), Err(NearbyError::ModelInvalid(_))));

    let mut d = base.clone();
    d.strata.retain(|s| s.subset.len() == 1);
    let err = SncModel::<BigInt>::from_doc(&d).unwrap_err().to_string();
    assert!(err.contains("missing"), "{err}");

    // acted symbol of order 2 on a stratum with m = 1
    let mut d = base.clone();
    d.stratum_mut(&["E1"]).unwrap().class_e_cover = "[G~]".into();
    assert!(matches!(SncModel::<BigInt>::from_doc(&d), Err(NearbyError::ModelInvalid(_))));

    let mut d = base.clone();
    d.total_class = Some("2*L".into());
    let m = SncModel::<BigInt>::from_doc(&d).unwrap();
    assert!(matches!(motivic_reduction(&m), Err(NearbyError::TotalClassMismatch { .. })));
}

#[test]
fn stratum_gcds() {
    assert_eq!(stratum_gcd(&[4, 6, 9], &[0, 1]), 2);
    assert_eq!(stratum_gcd(&[4, 6, 9], &[0, 1, 2]), 1);
    assert_eq!(stratum_gcd(&[4, 6, 9], &[2]), 9);
}

#[test]
fn blowup_steps() {
    let tag = RingTag::K0;
    let center = parse(tag, "[C] + L");
    let ambient = parse(tag, "[V]*L + 3");
    for c in 1..=8 {
        let s = BlowupStep { codim: c, center_class: center.clone(), ambient_class: ambient.clone() };
        assert!(blowup_step_identity(&s, ExceptionalFiber::Codim).unwrap());
        assert!(blowup_step_identity(&s, ExceptionalFiber::CodimMinusOne).unwrap());
    }
    let s = BlowupStep { codim: 0, center_class: center, ambient_class: ambient };
    assert!(blowup_step_identity(&s, ExceptionalFiber::Codim).unwrap());
    assert!(matches!(blowup_step_identity(&s, ExceptionalFiber::CodimMinusOne), Err(NearbyError::InvalidBlowup(_))));
}

#[test]
fn realizations() {
    let m = xy2();
    let r = realize_model(&m, &RealizationSpec::point_count(3)).unwrap();
    assert_eq!(r.nearby_quotient, BigInt::from(2));
    assert_eq!(r.reduction, BigInt::from(2));
    assert!(r.assembly_holds && r.congruent);
    assert_eq!(r.one_mod_l_shadow, None);

    let hd = realize_model(&m, &RealizationSpec::hodge_deligne()).unwrap();
    assert_eq!(hd.nearby_quotient, UvPoly::uv() + (-UvPoly::monomial(0, 0, BigInt::from(1))));
    assert!(hd.assembly_holds && hd.congruent);

    let smooth = SncModel::<BigInt>::from_json(include_str!("../../data/models/smooth.json")).unwrap();
    let r = realize_model(&smooth, &RealizationSpec::point_count(7)).unwrap();
    assert_eq!(r.nearby_quotient, BigInt::from(57));
    assert!(r.reduction_is_one);
    assert_eq!(r.one_mod_l_shadow, Some(true));

    let doc = r#"{"components":[{"name":"F","N":1}],
        "strata":[{"subset":["F"],"class_E":"[F]","class_E_cover":"[F]","m":1}]}"#;
    let bare = SncModel::<BigInt>::from_json(doc).unwrap();
    assert!(matches!(
        realize_model(&bare, &RealizationSpec::point_count(2)),
        Err(NearbyError::Class(MclassError::MissingSymbolImage(_)))
    ));
}
