//! End-to-end checks of the asc-lab binary: exit codes, warnings, and
//! byte-identical structured output against the golden files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asc-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {name}: {e}"))
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf8 output")
}

#[test]
fn analyze_q3_matches_golden() {
    let human = run(&["analyze", "--code", "q3", "--coords", "1,2"]);
    assert_eq!(stdout_of(&human), golden("analyze_q3.txt"));
    let structured = run(&[
        "analyze",
        "--code",
        "q3",
        "--coords",
        "1,2",
        "--format",
        "structured",
    ]);
    assert_eq!(stdout_of(&structured), golden("analyze_q3.json"));
}

#[test]
fn analyze_weight_mode_reports_counts() {
    let output = run(&["analyze", "--code", "q5", "--weight", "2", "--format", "structured"]);
    let text = stdout_of(&output);
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["element_count"], 106);
    assert_eq!(parsed["sigma"], 16);
    // Weight-limited sets have no group claim.
    assert!(parsed["identity_set_is_group"].is_null());
    assert_eq!(parsed["hamming_satisfied"], false);
}

#[test]
fn analyze_single_coordinate_is_unambiguous() {
    let output = run(&["analyze", "--code", "q3", "--coords", "1", "--format", "structured"]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(parsed["gamma"], 1);
    assert_eq!(parsed["sigma"], 4);
}

#[test]
fn normalizer_q3_matches_golden() {
    let output = run(&["normalizer", "--code", "q3"]);
    assert_eq!(stdout_of(&output), golden("normalizer_q3.txt"));
}

#[test]
fn simulate_identity_noise_is_trivial() {
    let output = run(&["simulate", "--code", "q3", "--noise", "identity"]);
    let text = stdout_of(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("++ 1.000000"));
    assert!(text.lines().count() == 4);
}

#[test]
fn simulate_ea_matches_golden_and_sums_to_one() {
    let output = run(&["simulate", "--code", "C1", "--noise", "EA", "--format", "structured"]);
    let text = stdout_of(&output);
    assert_eq!(text, golden("simulate_c1_ea.json"));
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let total: f64 = parsed
        .as_array()
        .unwrap()
        .iter()
        .map(|record| record["probability"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_accepts_noise_files() {
    let dir = tempfile::tempdir().unwrap();
    let noise_path = dir.path().join("noise.json");
    let golden_noise = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../asc-core/tests/golden/ea_noise.json");
    fs::copy(&golden_noise, &noise_path).unwrap();
    let from_file = run(&[
        "simulate",
        "--code",
        "C1",
        "--noise",
        noise_path.to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert_eq!(stdout_of(&from_file), golden("simulate_c1_ea.json"));
}

#[test]
fn simulate_runs_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    fs::write(
        &plan_path,
        r#"[
            {"code": "q3", "input": "0L", "preprocessing": "none"},
            {"code": "q3", "input": "+L", "preprocessing": "U:X_1,Z_1"}
        ]"#,
    )
    .unwrap();
    let output = run(&[
        "simulate",
        "--plan",
        plan_path.to_str().unwrap(),
        "--noise",
        "EA",
        "--format",
        "structured",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let records = parsed.as_array().unwrap();
    assert_eq!(records.len(), 8);
    for index in 0..2 {
        let total: f64 = records
            .iter()
            .filter(|r| r["plan_index"] == index)
            .map(|r| r["probability"].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "plan row {index}");
    }
}

#[test]
fn reconstruct_matches_goldens() {
    let human = run(&["reconstruct", "--code", "C1,C2,C3", "--noise", "EA"]);
    assert_eq!(stdout_of(&human), golden("reconstruct_ea.txt"));
    let structured = run(&[
        "reconstruct",
        "--code",
        "C1,C2,C3",
        "--noise",
        "EA",
        "--format",
        "structured",
    ]);
    assert_eq!(stdout_of(&structured), golden("reconstruct_ea.json"));
}

#[test]
fn reconstruct_single_code_warns_but_succeeds() {
    let output = run(&["reconstruct", "--code", "C1", "--noise", "EA"]);
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unresolved"), "stderr: {stderr}");
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("unresolved"));
}

#[test]
fn resources_match_golden() {
    let output = run(&["resources", "--m", "2", "--gamma", "2", "--format", "structured"]);
    assert_eq!(stdout_of(&output), golden("resources_22.json"));
    let human = run(&["resources", "--m", "2", "--gamma", "4"]);
    let text = stdout_of(&human);
    assert!(text.contains("preparations   5"));
    assert!(text.contains("configurations 64"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let output = run(&[
        "normalizer",
        "--code",
        "q3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), golden("normalizer_q3.txt"));
}

#[test]
fn bad_inputs_exit_with_code_two() {
    for args in [
        &["analyze", "--code", "q9"][..],
        &["analyze", "--code", "q3", "--coords", "0,1"][..],
        &["analyze", "--code", "q3", "--coords", "1,1"][..],
        &["simulate", "--code", "q3", "--noise", "nosuchpreset"][..],
        &["reconstruct", "--code", "C1", "--noise", "EA", "--format", "nope"][..],
        &["resources", "--m", "2", "--gamma", "0"][..],
    ] {
        let output = run(args);
        assert_eq!(output.status.code(), Some(2), "args: {args:?}");
        assert!(!output.stderr.is_empty());
    }
}
