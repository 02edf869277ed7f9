use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn jetcocycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetcocycle")).args(args).output().expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> String {
    v.as_object_mut().unwrap().remove("timing");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn list_shows_catalog() {
    let out = jetcocycle(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["identity", "affine", "moebius", "projective", "polynomial_perturbation", "exp_scale"] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
    assert_eq!(text, String::from_utf8(jetcocycle(&["list"]).stdout).unwrap());
}

#[test]
fn operator_cocycle_run_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = jetcocycle(&["verify", "--suite", "operator_L", "--dim", "1", "--seed", "7", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&path);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["config"]["backend"], "exact");
    let cases = r["cases"].as_array().unwrap();
    assert!(cases.len() >= 40);
    for c in cases {
        assert_eq!(c["suite"], "operator_L");
        assert_eq!(c["pass"], true);
        assert_eq!(c["residual"], 0.0);
    }
    assert_eq!(r["summary"]["failed"], 0);
}

#[test]
fn float_backend_with_several_suites() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = jetcocycle(&[
        "verify", "--backend", "float", "--dim", "2", "--suite", "lift", "--suite", "moyal", "--suite", "algebra_cocycles",
        "--samples", "3", "--json", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let suites = jetcocycle::cli::suite_counts(&report(&path));
    assert_eq!(suites.keys().map(String::as_str).collect::<Vec<_>>(), ["algebra_cocycles", "lift", "moyal"]);
    assert!(suites.values().all(|(total, passed)| total == passed && *total > 0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(jetcocycle(&["verify"]).status.code(), Some(2));
    assert_eq!(jetcocycle(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(jetcocycle(&["verify", "--suite", "lift", "--dim", "4"]).status.code(), Some(2));
    assert_eq!(jetcocycle(&["verify", "--suite", "lift", "--order", "3"]).status.code(), Some(2));
    assert_eq!(jetcocycle(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(jetcocycle(&["--help"]).status.code(), Some(0));
}

#[test]
fn scenario_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let path = dir.path().join("r.json");
    std::fs::write(
        &scenario,
        r#"{"suites": ["operator_L"], "samples": 2, "maps": [
            {"name": "polynomial_perturbation", "params": {"eps": 1}},
            {"name": "moebius", "params": {"a": 1, "b": 0, "c": 1, "d": 1}}]}"#,
    )
    .unwrap();
    let out = jetcocycle(&["verify", scenario.to_str().unwrap(), "--samples", "9", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&path);
    assert_eq!(r["config"]["samples"], 2);
    assert_eq!(r["config"]["maps"].as_array().unwrap().len(), 2);

    std::fs::write(&scenario, r#"{"suites": ["lift"], "colour": "blue"}"#).unwrap();
    assert_eq!(jetcocycle(&["verify", scenario.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&scenario, r#"{"suites": ["lift"], "maps": [{"name": "warp"}]}"#).unwrap();
    assert_eq!(jetcocycle(&["verify", scenario.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failing_cases_exit_one() {
    // a reflection without a declared orientation leaves no admissible
    // log-volume sample point
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"suites": ["classical_cocycles"], "dim": 2, "maps": [
            {"name": "projective", "params": {"a": [[-1, 0], [0, 1]], "b": [0, 0], "c": [0, 0], "d": 1}}]}"#,
    )
    .unwrap();
    let path = dir.path().join("r.json");
    let out = jetcocycle(&["verify", scenario.to_str().unwrap(), "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&path);
    assert!(r["summary"]["failed"].as_u64().unwrap() > 0);
    assert!(r["cases"].as_array().unwrap().iter().any(|c| c["error"].is_string()));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = jetcocycle(&[
            "verify", "--suite", "lift", "--suite", "cocycle_C", "--suite", "consistency", "--dim", "2", "--seed", "11",
            "--json", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        without_timing(report(&path))
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let other = {
        let path = dir.path().join("c.json");
        jetcocycle(&["verify", "--suite", "lift", "--suite", "cocycle_C", "--suite", "consistency", "--dim", "2", "--seed", "12", "--json", path.to_str().unwrap()]);
        without_timing(report(&path))
    };
    assert_ne!(a, other);
}

#[test]
fn demos_print_tables() {
    let cubic = String::from_utf8(jetcocycle(&["demo", "flat-cubic"]).stdout).unwrap();
    assert!(cubic.contains("d_xi^3  -6*xi"), "{cubic}");
    let affine = String::from_utf8(jetcocycle(&["demo", "affine"]).stdout).unwrap();
    assert!(affine.contains("zero operator"));
    let moebius = jetcocycle(&["demo", "moebius"]);
    assert!(moebius.status.success());
    assert!(!String::from_utf8(moebius.stdout).unwrap().contains("zero operator"));
}
