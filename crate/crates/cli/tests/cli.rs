use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bimap-lab"));
    c.env_remove("BIMAP_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(line.trim().lines().last().unwrap()).unwrap()
}

#[test]
fn single_edge_map() {
    let text = stdout(&run(&["sample-map", "--n", "1", "--seed", "3", "--pointed"]));
    assert!(text.starts_with("MAP n=1 root="));
    assert_eq!(text.lines().nth(1).unwrap().trim(), "0 1");
    let unpointed = stdout(&run(&["sample-map", "--n", "1", "--seed", "3"]));
    assert!(unpointed.contains("origin=none"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = run(&["sample-mobile", "--n", "500", "--seed", "9", "--count", "3"]);
    let b = run(&["sample-mobile", "--n", "500", "--seed", "9", "--count", "3"]);
    assert_eq!(stdout(&a), stdout(&b));
    let c = bin()
        .args(["sample-mobile", "--n", "500", "--count", "3"])
        .env("BIMAP_LAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&c));
    let d = run(&["sample-mobile", "--n", "500", "--seed", "10", "--count", "3"]);
    assert_ne!(stdout(&a), stdout(&d));
}

#[test]
fn enumerate_small_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout(&run(&["enumerate", "--n", "2", "--out", out]));
    let census: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("census_n2.json")).unwrap()).unwrap();
    assert_eq!(census["mobiles"], 4);
    assert_eq!(census["distinct_codes"], 8);
    assert_eq!(census["rooted_pointed_maps"], "8");
    let mobiles = std::fs::read_to_string(dir.path().join("mobiles_n2.txt")).unwrap();
    assert_eq!(mobiles.matches("MOBILE").count(), 4);
    let law = std::fs::read_to_string(dir.path().join("law_n2.csv")).unwrap();
    assert!(law.starts_with("treeCode,p_num,p_den"));
    assert_eq!(run(&["enumerate", "--n", "7", "--out", out]).status.code(), Some(2));
}

#[test]
fn pipeline_through_stdin() {
    let mobile = stdout(&run(&["sample-mobile", "--n", "200", "--seed", "4"]));
    let map = stdout(&run_stdin(&["bdg", "--in", "-", "--eps", "1"], mobile.as_bytes()));
    let report: serde_json::Value = serde_json::from_str(&stdout(&run_stdin(&["validate", "--in", "-"], map.as_bytes()))).unwrap();
    assert_eq!(report["valid"], true);
    assert_eq!(report["edges"], 200);
    let back = stdout(&run_stdin(&["bdg-inverse", "--in", "-"], map.as_bytes()));
    let (first, _) = mobile.split_once("eps=").unwrap();
    assert!(back.starts_with(first));
    assert!(back.contains("eps=1"));
    let report: serde_json::Value = serde_json::from_str(&stdout(&run_stdin(&["validate", "--in", "-"], mobile.as_bytes()))).unwrap();
    assert_eq!(report["valid"], true);
}

#[test]
fn validate_sampled_maps_and_gzip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.txt.gz");
    let p = path.to_str().unwrap();
    stdout(&run(&["sample-map", "--n", "1000", "--seed", "5", "--out", p, "--gzip"]));
    let report: serde_json::Value = serde_json::from_str(&stdout(&run(&["validate", "--in", p]))).unwrap();
    assert_eq!(report["valid"], true);
    assert_eq!(report["pointed"], false);
}

#[test]
fn encodings_have_expected_lengths() {
    let mobile = stdout(&run(&["sample-mobile", "--n", "50", "--seed", "6"]));
    let contour = stdout(&run_stdin(&["encode", "--in", "-", "--what", "contour"], mobile.as_bytes()));
    let label = stdout(&run_stdin(&["encode", "--in", "-", "--what", "label"], mobile.as_bytes()));
    // Header line plus one row per point.
    assert_eq!(contour.lines().count(), 1 + 101);
    assert_eq!(label.lines().count(), 1 + 51);
}

#[test]
fn exit_codes() {
    let bad = run_stdin(&["validate", "--in", "-"], b"MOBILE n=1\n1 0\n0 5\n");
    assert_eq!(bad.status.code(), Some(1));
    let malformed = run_stdin(&["bdg", "--in", "-"], b"garbage\n");
    assert_eq!(malformed.status.code(), Some(2));
    assert_eq!(error_json(&malformed)["exit_code"], 2);
    let budget = run(&["sample-map", "--n", "100000", "--seed", "1", "--max-attempts", "0"]);
    assert_eq!(budget.status.code(), Some(3));
    assert_eq!(error_json(&budget)["error"], "budget_exceeded");
    let missing = run(&["validate", "--in", Path::new("/nonexistent/x").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn experiment_writes_report_and_frozen_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["experiment", "kemperman", "--config", r#"{"j_max": 8, "m_max": 8}"#, "--out", out, "--freeze"]);
    let text = stdout(&o);
    assert!(text.contains("PASS"));
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".config.json")), "{names:?}");
    assert!(names.contains(&"kemperman_n8_seed0.json".to_string()), "{names:?}");
    let unknown = run(&["experiment", "kemperman", "--config", r#"{"bogus": 1}"#, "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
}
