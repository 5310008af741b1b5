//! Behavior tests for the command-line interface: schema stability,
//! reproducibility, and exit codes.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corners"))
}

#[test]
fn density_schema_and_metadata() {
    let out = bin().arg("density").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "u,phi_second,half_mass_weight");
    assert!(stdout.lines().count() > 500);
    // metadata goes to stderr when no --out is given
    let meta: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stderr).unwrap()).unwrap();
    assert!((meta["gamma1"].as_f64().unwrap() - 0.0669872981).abs() < 1e-8);
    assert!((meta["mass_check"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn density_empty_grid_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"grid": 0}"#).unwrap();
    let out = bin()
        .arg("density")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "u,phi_second,half_mass_weight\n"
    );
}

#[test]
fn density_mass_sums_to_one_with_atom() {
    // m_hat < n_hat carries a unit atom; the band integral plus the atom is 1.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"alpha_hat": 1.0, "m_hat": 1.0, "n_hat": 2.0, "grid": 2048}"#,
    )
    .unwrap();
    let out = bin()
        .arg("density")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stderr).unwrap()).unwrap();
    assert_eq!(meta["atom_mass"].as_f64().unwrap(), 1.0);
    assert!((meta["mass_check"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn sample_reproducible_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let st = bin()
            .args(["sample", "--seed", "42", "--out"])
            .arg(path)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give identical files");
    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "replica,level,index,value");
    // diagnostics sidecar exists and parses
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.diag.json")).unwrap())
            .unwrap();
    assert!(diag["acceptance_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn sample_different_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(bin()
        .args(["sample", "--seed", "1", "--out"])
        .arg(&a)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["sample", "--seed", "2", "--out"])
        .arg(&b)
        .status()
        .unwrap()
        .success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn moments_default_rows() {
    let out = bin().arg("moments").output().unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let arr = rows.as_array().unwrap();
    assert_eq!(arr[0]["k"], 0);
    assert!((arr[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((arr[1]["value"].as_f64().unwrap() - 0.625).abs() < 1e-9);
}

#[test]
fn covariance_diff_same_level_value() {
    let out = bin().arg("covariance").output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 3.0 / 64.0).abs() < 1e-9);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"grid": 16, "no_such_key": 1}"#).unwrap();
    let out = bin()
        .arg("density")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_fast_exits_zero_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--fast", "--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("criterion 01 [PASS]"));
    assert!(stdout.contains("criterion 07 [skip]"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 13);
}

#[test]
fn roots_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"m": 1, "n": 3, "alpha": 2.0}"#).unwrap();
    let out = bin()
        .arg("roots")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,root");
    assert_eq!(lines.len(), 4); // header + padded length n = 3
                                // degree-one root of the weight x^1 (1-x)^2 is 2/5; the rest is padding
    assert!(lines[1].starts_with("1,4.000000000000000"));
    assert!(lines[3].starts_with("3,1.0000000000000000e0"));
}

#[test]
fn diagram_limit_shape_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"source": "limit", "grid": 64}"#).unwrap();
    let out = bin()
        .arg("diagram")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "u,value");
    assert_eq!(text.lines().count(), 66); // header + grid + 1
}
