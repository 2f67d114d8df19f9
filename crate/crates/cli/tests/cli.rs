use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kvar")).args(args).output().expect("binary runs")
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_catalog_passes() {
    let o = kvar(&["verify-catalog"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn machine_output_is_deterministic() {
    let a = kvar(&["--format", "machine", "verify-catalog", "--samples", "30"]);
    let b = kvar(&["--format", "machine", "verify-catalog", "--samples", "30"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["command"], "verify-catalog");
    }
}

#[test]
fn seed_changes_samples_not_verdicts() {
    let a = kvar(&["--format", "machine", "--seed", "1", "verify-catalog", "--samples", "20"]);
    let b = kvar(&["--format", "machine", "--seed", "2", "verify-catalog", "--samples", "20"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn corrupted_model_fails_with_witness() {
    let o = kvar(&["--format", "machine", "congruence-check", &data("models/mutated/xy2_wrong_e12.json")]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["status"], "fail");
    assert!(v["data"]["witness"].is_string());
}

#[test]
fn good_model_passes() {
    let o = kvar(&["congruence-check", &data("models/xy2.json")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dimension\": 1}").unwrap();
    assert_eq!(code(&kvar(&["quotient-class", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&kvar(&["nearby-fiber", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&kvar(&["no-such-command"])), 2);
    assert_eq!(code(&kvar(&["realize", "--class", "L +", "--q", "4"])), 2);
    assert_eq!(code(&kvar(&["realize", "--class", "L", "--q", "12"])), 2);
}

#[test]
fn budget_overflow_exits_three() {
    let a = data("actions/20_f5_exinsep.json");
    let o = kvar(&["point-count", &a, "--m", "8", "--max-field-degree", "8"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    let o = kvar(&["point-count", &a, "--m", "2", "--mode", "enumerate", "--max-points", "100"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    let o = kvar(&["quotient-class", &a, "--max-characteristic", "3"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
}

#[test]
fn invalid_action_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(data("actions/04_f5_reflection.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&src).unwrap();
    // Declared order 3 for an involution.
    doc["generators"][0]["order"] = 3.into();
    doc["group"]["tame_orders"] = serde_json::json!([3]);
    let p: PathBuf = dir.path().join("bad_order.json");
    std::fs::write(&p, doc.to_string()).unwrap();
    let o = kvar(&["validate-action", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert_eq!(code(&kvar(&["quotient-class", p.to_str().unwrap()])), 1);
}

#[test]
fn point_count_with_presentation() {
    let o = kvar(&["--format", "machine", "point-count", &data("actions/02_f3_translation.json"), "--m", "1", "--m", "3", "--mode", "enumerate"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[1]["data"]["count"], "27");
    assert_eq!(lines[1]["data"]["presented"], "27");
}

#[test]
fn realize_smooth_model_and_classes() {
    let o = kvar(&["--format", "machine", "realize", "--model", &data("models/smooth.json"), "--q", "7"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"S_f/mu\":\"57\""));
    let o = kvar(&["--format", "machine", "realize", "--class", "L^2 + L + 1", "--hd"]);
    assert!(stdout(&o).contains("u^2*v^2 + u*v + 1"), "{}", stdout(&o));
    let o = kvar(&["--format", "machine", "realize", "--class", "[E] * L", "--q", "9", "--symbol", "E=L-1"]);
    assert!(stdout(&o).contains("\"value\":\"72\""), "{}", stdout(&o));
}

#[test]
fn export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = kvar(&["export-catalog", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let d = dir.path();
    let o = kvar(&[
        "verify-catalog",
        "--actions",
        d.join("actions").to_str().unwrap(),
        "--models",
        d.join("models").to_str().unwrap(),
        "--mutated",
        d.join("models/mutated").to_str().unwrap(),
        "--samples",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn trace_is_printed_on_request() {
    let o = kvar(&["invariant-ring", &data("actions/08_f4_cube_roots.json"), "--emit-trace"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("tame-base"));
    let o = kvar(&["--format", "machine", "quotient-class", &data("actions/19_f3_exinsep.json"), "--emit-trace"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["data"]["trace"]["steps"].is_array());
}
