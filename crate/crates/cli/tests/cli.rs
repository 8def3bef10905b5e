use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cayley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cayley(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cayley(&["verify", "all", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(cayley(&["verify", "sedenion"]).status.code(), Some(2));
    let out = cayley(&["spectrum", "--grid", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grids"));
}

#[test]
fn octonion_suite_writes_a_passing_report() {
    let dir = scratch("cli-octonion");
    let out = cayley(&["verify", "octonion", "--trials", "2000", "--seed", "42", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["seed"], 42);
    let checks = report["suites"][0]["checks"].as_array().unwrap();
    let norm = checks.iter().find(|c| c["name"] == "norm-multiplicativity").unwrap();
    assert!(norm["residual"].as_f64().unwrap() < 1e-12);
    assert!(checks.iter().all(|c| c["anchor"].as_str().is_some_and(|a| !a.is_empty())));
}

#[test]
fn spectrum_command_writes_csv_and_svg() {
    let dir = scratch("cli-spectrum");
    let out = cayley(&["spectrum", "--radius", "4,10", "--grid", "1000,2000", "--format", "csv", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("R,N,lambda,extrapolated"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let lambda = |r: &[&str]| r[2].parse::<f64>().unwrap();
    assert!(lambda(&rows[1]) > lambda(&rows[3]));
    assert!(rows.iter().all(|r| lambda(r) > 121.0));
    assert!(std::fs::read_to_string(dir.join("spectrum.svg")).unwrap().contains("viewBox=\"0 0 800 600\""));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("suite,check,"));
}

#[test]
fn corrupted_table_fails_and_names_checks() {
    let dir = scratch("cli-corrupted");
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corrupted_table.txt");
    let out = cayley(&[
        "verify",
        "octonion",
        "--trials",
        "100",
        "--table",
        fixture.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("octonion.table-structure"), "{err}");
}

#[test]
fn unreadable_table_is_a_usage_error() {
    let out = cayley(&["verify", "octonion", "--table", "/nonexistent/table.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("cli-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "# quick run\nseed = 5\ntrials = 50\n").unwrap();
    let out = cayley(&[
        "verify",
        "octonion",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["seed"], 6);
    assert_eq!(report["config"]["trials"], 50);

    let summary = cayley(&["report", "--out", dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(summary.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&summary.stdout).contains("octonion,7,"));
}

#[test]
fn pinch_writes_both_run_tables() {
    let dir = scratch("cli-pinch");
    let out = cayley(&["pinch", "--trials", "8", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let min = std::fs::read_to_string(dir.join("pinch.csv")).unwrap();
    assert!(min.starts_with("trial,K\n"));
    assert_eq!(min.lines().count(), 9);
    assert!(dir.join("pinch_max.csv").exists());
}
