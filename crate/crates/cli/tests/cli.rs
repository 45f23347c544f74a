use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn badgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_badgame"))
        .args(args)
        .env_remove("BADGAME_QBUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn growth_reports_exact_slack() {
    let out = badgame(&["verify", "growth"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["violations"], 0);
    assert_eq!(rep["details"]["slack"], "2392/27");
}

#[test]
fn attach_example() {
    let out = badgame(&["attach", "--s", "1/3", "--t", "2/3", "--p", "1", "--r", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["line"]["A"], "1");
    assert_eq!(rep["line"]["B"], "1");
    assert_eq!(rep["line"]["C"], "-1");
    assert_eq!(rep["height"], "3");
    // the same point given as coordinates
    let again = json(&badgame(&["attach", "--point", "1/3,2/3"]));
    assert_eq!(again, rep);
}

#[test]
fn zero_rounds_give_vacuous_certification() {
    let out = badgame(&["play", "--rounds", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json(&out);
    assert_eq!(t["rounds"].as_array().unwrap().len(), 0);
    assert!(t["b0"].is_object() && t["a0"].is_object());
    assert_eq!(t["certification"]["certified_q"], "0");
    assert_eq!(t["certification"]["passed"], true);
}

#[test]
fn same_seed_gives_identical_transcripts() {
    let args = ["play", "--bob", "random", "--seed", "11", "--rounds", "14", "--lookahead", "2"];
    let a = badgame(&args);
    let b = badgame(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = badgame(&["play", "--bob", "random", "--seed", "12", "--rounds", "14", "--lookahead", "2"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn certify_reproduces_saved_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.json");
    let path_str = path.to_str().unwrap();
    let out = badgame(&["play", "--bob", "steering:1/2,1/2", "--rounds", "14", "--out", path_str]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();

    let out = badgame(&["certify", "--transcript", path_str]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert_eq!(rep["matches_recorded"], true);
    assert_eq!(rep["certification"], saved["certification"]);
}

#[test]
fn tampered_transcript_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.json");
    let out = badgame(&["play", "--rounds", "14"]);
    let mut t = json(&out);
    t["rounds"][3]["vertex"][2] = Value::from(0);
    std::fs::write(&path, serde_json::to_string(&t).unwrap()).unwrap();
    let out = badgame(&["certify", "--transcript", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_region_certificate_exits_one() {
    let out = badgame(&["certify", "--region", r#"{"x0":"0","y0":"0","side":"1/1000"}"#, "--qmax", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let rep = json(&out);
    assert_eq!(rep["certificate"]["witness"]["q"], "1");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(badgame(&["attach"]).status.code(), Some(2));
    assert_eq!(badgame(&["attach", "--point", "1/2"]).status.code(), Some(2));
    assert_eq!(badgame(&["play", "--bob", "sideways"]).status.code(), Some(2));
    assert_eq!(badgame(&["verify", "growth", "--beta", "3/2"]).status.code(), Some(2));
}

#[test]
fn config_file_and_budget_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"s": "1/2", "t": "1/2", "seed": 4}"#).unwrap();
    let out = badgame(&["verify", "lemma-aug", "--qmax", "12", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["lemma_aug"]["details"]["pairs"][0]["st"], "(1/2, 1/2)");

    let out = Command::new(env!("CARGO_BIN_EXE_badgame"))
        .args(["certify", "--region", r#"{"x0":"1/3","y0":"1/3","side":"1/1000"}"#, "--qmax", "1000000"])
        .env("BADGAME_QBUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn dynamics_writes_csv() {
    let out = badgame(&["dynamics", "--x", "0", "--y", "0", "--umax", "1", "--step", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,systole,vx,vy,vz");
    assert_eq!(lines.len(), 4);
    let systole: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((systole - (-1.0f64).exp()).abs() < 1e-9);
}
