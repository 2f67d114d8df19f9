//! Bundled example actions and SNC models.
//!
//! The actions are built here and shipped as JSON under `data/actions`; a
//! test keeps the two in sync. Models live only as JSON.

use std::sync::Arc;

use crate::action::{AbelianGroupSpec, ActionDoc, AffineDatum, KMatrix, SemiLinearAffineAction, SemiLinearAffineGenerator};
use crate::gfq::{FieldElement, FieldTower, Fq};
use crate::nearby::ModelDoc;
use crate::quotient::StepKind;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub note: &'static str,
    pub action: SemiLinearAffineAction,
    /// Case branches the d = 1 descent must take.
    pub branches: Vec<StepKind>,
}

impl CatalogEntry {
    pub fn doc(&self) -> ActionDoc {
        let mut d = ActionDoc::from_action(&self.action);
        d.name = Some(self.name.to_string());
        d.note = Some(self.note.to_string());
        d
    }

    pub fn file_name(&self, index: usize) -> String {
        format!("{:02}_{}.json", index + 1, self.name)
    }

    pub fn is_twisted(&self) -> bool {
        self.action.generators().iter().any(|g| g.datum.twist != 0)
    }
}

fn tower(p: u32, degrees: &[usize]) -> Arc<FieldTower> {
    Arc::new(FieldTower::new(p, degrees).expect("catalog towers are small"))
}

fn gen(twist: u32, matrix: KMatrix, translation: Vec<FieldElement>, order: u64) -> SemiLinearAffineGenerator {
    SemiLinearAffineGenerator { datum: AffineDatum { twist, matrix, translation }, declared_order: order }
}

/// x ↦ λx + c on A^1.
fn line(f: Fq<'_>, twist: u32, lambda: FieldElement, c: FieldElement, order: u64) -> SemiLinearAffineGenerator {
    let _ = f;
    gen(twist, vec![vec![lambda]], vec![c], order)
}

fn diag2(f: Fq<'_>, a: FieldElement, b: FieldElement) -> KMatrix {
    vec![vec![a, f.zero()], vec![f.zero(), b]]
}

fn build(
    t: &Arc<FieldTower>,
    levels: (usize, usize),
    wild: Vec<u64>,
    tame: Vec<u64>,
    dim: usize,
    gens: Vec<SemiLinearAffineGenerator>,
) -> SemiLinearAffineAction {
    SemiLinearAffineAction::new(t.clone(), levels.0, levels.1, AbelianGroupSpec::new(wild, tame), dim, gens).expect("catalog actions are well formed")
}

/// Every bundled action, in a fixed order.
pub fn actions() -> Vec<CatalogEntry> {
    use StepKind::*;
    let mut out = Vec::new();
    let mut push = |name, note, action, branches: Vec<StepKind>| out.push(CatalogEntry { name, note, action, branches });

    for p in [2u32, 3, 5] {
        let t = tower(p, &[1]);
        let f = t.level(0);
        let name = match p {
            2 => "f2_translation",
            3 => "f3_translation",
            _ => "f5_translation",
        };
        push(name, "x -> x + 1 over the prime field", build(&t, (0, 0), vec![p as u64], vec![], 1, vec![line(f, 0, f.one(), f.one(), p as u64)]), vec![CaseFrobeniusTrivial]);
    }

    let t5 = tower(5, &[1]);
    let f = t5.level(0);
    push("f5_reflection", "x -> -x", build(&t5, (0, 0), vec![], vec![2], 1, vec![line(f, 0, f.from_int(-1), f.zero(), 2)]), vec![TameBase]);
    push("f5_order_four", "x -> 2x with 2 a primitive 4th root of unity", build(&t5, (0, 0), vec![], vec![4], 1, vec![line(f, 0, f.from_int(2), f.zero(), 4)]), vec![TameBase]);

    let t3 = tower(3, &[1]);
    let f = t3.level(0);
    push("f3_shifted_reflection", "x -> -x + 1, fixed point 2", build(&t3, (0, 0), vec![], vec![2], 1, vec![line(f, 0, f.from_int(-1), f.one(), 2)]), vec![Recenter, TameBase]);

    let t4 = tower(2, &[2]);
    let f = t4.level(0);
    let w = f.generator();
    push("f4_translation", "x -> x + t over F_4", build(&t4, (0, 0), vec![2], vec![], 1, vec![line(f, 0, f.one(), w.clone(), 2)]), vec![CaseFrobeniusTrivial]);
    push("f4_cube_roots", "x -> t x with t a primitive cube root of unity", build(&t4, (0, 0), vec![], vec![3], 1, vec![line(f, 0, w.clone(), f.zero(), 3)]), vec![TameBase]);
    push(
        "f4_klein_translations",
        "x -> x + 1 and x -> x + t",
        build(&t4, (0, 0), vec![2, 2], vec![], 1, vec![line(f, 0, f.one(), f.one(), 2), line(f, 0, f.one(), w.clone(), 2)]),
        vec![CaseFrobeniusTrivial],
    );

    let t42 = tower(2, &[1, 2]);
    let f = t42.level(1);
    let w = f.generator();
    push("f4_over_f2_frobenius", "Frobenius on the scalars of A^1_{F_4}", build(&t42, (0, 1), vec![2], vec![], 1, vec![line(f, 1, f.one(), f.zero(), 2)]), vec![CaseBZero]);
    push(
        "f4_over_f2_twisted_scaling",
        "x -> t x composed with Frobenius on scalars",
        build(&t42, (0, 1), vec![2], vec![], 1, vec![line(f, 1, w.clone(), f.zero(), 2)]),
        vec![CaseBZero],
    );
    push(
        "f4_over_f2_artin_schreier",
        "x -> x + 1 composed with Frobenius on scalars",
        build(&t42, (0, 1), vec![2], vec![], 1, vec![line(f, 1, f.one(), f.one(), 2)]),
        vec![CaseArtinSchreier],
    );
    push(
        "f4_over_f2_order_four",
        "x -> x + t composed with Frobenius; its square is x -> x + 1",
        build(&t42, (0, 1), vec![4], vec![], 1, vec![line(f, 1, f.one(), w.clone(), 4)]),
        vec![CaseFrobeniusTrivial],
    );

    let t164 = tower(2, &[2, 4]);
    let f = t164.level(1);
    let w4 = t164.embed(&t164.level(0).generator(), 1).expect("F_4 embeds in F_16");
    push(
        "f16_over_f4_artin_schreier",
        "x -> x + t over F_16 / F_4 with the F_4-Frobenius on scalars",
        build(&t164, (0, 1), vec![2], vec![], 1, vec![line(f, 1, f.one(), w4, 2)]),
        vec![CaseArtinSchreier],
    );

    let t93 = tower(3, &[1, 2]);
    let f = t93.level(1);
    push("f9_over_f3_frobenius", "Frobenius on the scalars of A^1_{F_9}", build(&t93, (0, 1), vec![], vec![2], 1, vec![line(f, 1, f.one(), f.zero(), 2)]), vec![TameBase]);
    push(
        "f9_over_f3_order_six",
        "x -> x + 1 and Frobenius on scalars",
        build(&t93, (0, 1), vec![3], vec![2], 1, vec![line(f, 0, f.one(), f.one(), 3), line(f, 1, f.one(), f.zero(), 2)]),
        vec![CaseFrobeniusTrivial, TameBase],
    );

    let t255 = tower(5, &[1, 2]);
    let f = t255.level(1);
    push("f25_over_f5_frobenius", "Frobenius on the scalars of A^1_{F_25}", build(&t255, (0, 1), vec![], vec![2], 1, vec![line(f, 1, f.one(), f.zero(), 2)]), vec![TameBase]);

    // dimension two
    for p in [2u32, 3, 5] {
        let t = tower(p, &[1]);
        let f = t.level(0);
        let (o, z) = (f.one(), f.zero());
        let name = match p {
            2 => "f2_exinsep",
            3 => "f3_exinsep",
            _ => "f5_exinsep",
        };
        push(
            name,
            "x -> x + y, y -> y",
            build(&t, (0, 0), vec![p as u64], vec![], 2, vec![gen(0, vec![vec![o.clone(), o.clone()], vec![z.clone(), o.clone()]], vec![z.clone(), z], p as u64)]),
            vec![],
        );
    }

    let f = t5.level(0);
    let (o, z) = (f.one(), f.zero());
    push(
        "f5_swap",
        "x <-> y",
        build(&t5, (0, 0), vec![], vec![2], 2, vec![gen(0, vec![vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]], vec![z.clone(), z.clone()], 2)]),
        vec![],
    );

    let f = t5.level(0);
    let (o, z, m1) = (f.one(), f.zero(), f.from_int(-1));
    push(
        "f5_sign_changes",
        "x -> -x and y -> -y separately",
        build(
            &t5,
            (0, 0),
            vec![],
            vec![2, 2],
            2,
            vec![gen(0, diag2(f, m1.clone(), o.clone()), vec![z.clone(), z.clone()], 2), gen(0, diag2(f, o.clone(), m1), vec![z.clone(), z.clone()], 2)],
        ),
        vec![],
    );

    let f = t3.level(0);
    let (o, z, m1) = (f.one(), f.zero(), f.from_int(-1));
    push(
        "f3_translation_and_sign",
        "x -> x + 1 and y -> -y",
        build(
            &t3,
            (0, 0),
            vec![3],
            vec![2],
            2,
            vec![gen(0, diag2(f, o.clone(), o.clone()), vec![o.clone(), z.clone()], 3), gen(0, diag2(f, o.clone(), m1), vec![z.clone(), z.clone()], 2)],
        ),
        vec![],
    );

    let t2 = tower(2, &[1]);
    let f = t2.level(0);
    let (o, z) = (f.one(), f.zero());
    push(
        "f2_plane_translations",
        "x -> x + 1 and y -> y + 1",
        build(
            &t2,
            (0, 0),
            vec![2, 2],
            vec![],
            2,
            vec![gen(0, diag2(f, o.clone(), o.clone()), vec![o.clone(), z.clone()], 2), gen(0, diag2(f, o.clone(), o.clone()), vec![z.clone(), o.clone()], 2)],
        ),
        vec![],
    );

    let f = t4.level(0);
    let w = f.generator();
    push(
        "f4_plane_cube_roots",
        "(x, y) -> (t x, t^2 y)",
        build(&t4, (0, 0), vec![], vec![3], 2, vec![gen(0, diag2(f, w.clone(), f.mul(&w, &w)), vec![f.zero(), f.zero()], 3)]),
        vec![],
    );

    let f = t42.level(1);
    let (o, z) = (f.one(), f.zero());
    push(
        "f4_over_f2_plane_frobenius",
        "Frobenius on the scalars of A^2_{F_4}",
        build(&t42, (0, 1), vec![2], vec![], 2, vec![gen(1, diag2(f, o.clone(), o.clone()), vec![z.clone(), z], 2)]),
        vec![],
    );
    out
}

/// Writes every catalog action to `dir` and returns the file names.
pub fn export_actions(dir: &std::path::Path) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (i, e) in actions().iter().enumerate() {
        let name = e.file_name(i);
        std::fs::write(dir.join(&name), e.doc().to_json() + "\n")?;
        names.push(name);
    }
    Ok(names)
}

const MODEL_FILES: [(&str, &str); 6] = [
    ("xy2.json", include_str!("../data/models/xy2.json")),
    ("xayb.json", include_str!("../data/models/xayb.json")),
    ("smooth.json", include_str!("../data/models/smooth.json")),
    ("x2.json", include_str!("../data/models/x2.json")),
    ("xyz.json", include_str!("../data/models/xyz.json")),
    ("xy_blowup.json", include_str!("../data/models/xy_blowup.json")),
];

const MUTATED_FILES: [(&str, &str); 6] = [
    ("xy2_wrong_e12.json", include_str!("../data/models/mutated/xy2_wrong_e12.json")),
    ("xy2_wrong_quotient.json", include_str!("../data/models/mutated/xy2_wrong_quotient.json")),
    ("xy_blowup_wrong_cover.json", include_str!("../data/models/mutated/xy_blowup_wrong_cover.json")),
    ("smooth_extra_point.json", include_str!("../data/models/mutated/smooth_extra_point.json")),
    ("xyz_missing_cover.json", include_str!("../data/models/mutated/xyz_missing_cover.json")),
    ("xayb_double_crossing.json", include_str!("../data/models/mutated/xayb_double_crossing.json")),
];

fn parse_all(files: &[(&'static str, &'static str)]) -> Vec<(&'static str, ModelDoc)> {
    files.iter().map(|(n, s)| (*n, serde_json::from_str(s).unwrap_or_else(|e| panic!("bundled model {n}: {e}")))).collect()
}

/// The model gallery: every entry satisfies the congruence.
pub fn models() -> Vec<(&'static str, ModelDoc)> {
    parse_all(&MODEL_FILES)
}

/// Corrupted models: each one must fail the congruence.
pub fn mutated_models() -> Vec<(&'static str, ModelDoc)> {
    parse_all(&MUTATED_FILES)
}
