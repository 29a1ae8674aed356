use std::path::Path;
use std::process::{Command, Output};

fn helmstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmstab")).args(args).env("HELMSTAB_THREADS", "1").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"{"lambdas": [2.0], "potential": {"kind": "piecewise-constant", "q0": 1.0, "a": 0.5}, "angular": {"n_dir": 8}}"#;

#[test]
fn unknown_config_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"lambdas": [2.0], "potential": {"kind": "zero"}, "lamdas": [3]}"#);
    let out = helmstab(&["forward", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamdas"));
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmstab(&["nearfield", "--config", "/nonexistent/cfg.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_case_suite_passes() {
    let out = helmstab(&["verify", "--suite", "free-case"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn unknown_suite_is_rejected() {
    let out = helmstab(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forward_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out_dir = dir.path().join(sub);
            let out = helmstab(&["forward", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert!(out_dir.join("config.json").exists());
            std::fs::read(out_dir.join("far_field.csv")).unwrap()
        })
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn nearfield_writes_one_row_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"lambdas": [2.0], "potential": {"kind": "zero"}, "n_max": 10}"#);
    let out = helmstab(&["nearfield", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("near_field.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("lambda,"));
    assert!(lines.count() >= 11);
}
