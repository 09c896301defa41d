use std::fs;
use std::process::{Command, Output};

use mirrortail_core::experiment::{read_csv, CSV_HEADER};

fn mirrortail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mirrortail"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&mirrortail(&[])), 2);
    assert_eq!(code(&mirrortail(&["no-such-command"])), 2);
    assert_eq!(code(&mirrortail(&["eval-bounds", "--formula", "bogus"])), 2);
    assert_eq!(code(&mirrortail(&["eval-bounds", "--set", "delta=abc"])), 2);
    assert_eq!(code(&mirrortail(&["run-experiment", "--config", "/nonexistent/cfg.json"])), 2);
}

#[test]
fn bad_config_fields_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"runs": 10, "no_such_field": 1}"#).unwrap();
    let o = mirrortail(&["run-experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_field"));
}

#[test]
fn eval_bounds_prints_requested_formulas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bounds.cfg");
    fs::write(&cfg, "# unit inputs\nT = 100\ndelta = 0.05\n").unwrap();
    let o = mirrortail(&[
        "eval-bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "D=2",
        "--formula",
        "weibull-constant,bounded-poly",
    ]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(names, ["weibull-constant", "bounded-poly"]);
    for line in out.lines() {
        let v: f64 = line.split(' ').nth(1).unwrap().parse().unwrap();
        assert!(v > 0.0);
    }
}

#[test]
fn invariant_check_passes_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("inv.csv");
    let o = mirrortail(&[
        "check-invariants",
        "--traces",
        "40",
        "--identity-t-max",
        "20",
        "--rho-t-max",
        "50",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("name,max_violation"));
}

#[test]
fn experiment_csv_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"runs": 60, "t_grid": [20, 40], "noises": ["gaussian", "weibull:10/3"]}"#).unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let path = dir.path().join(format!("out{workers}.csv"));
        let o = mirrortail(&[
            "run-experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let rows = read_csv(&dir.path().join("out1.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.runs == 60 && r.quantile_err >= 0.0));
}

#[test]
fn failed_signatures_exit_with_one() {
    // Two runs per cell are far too few for the gap and separation signatures.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"runs": 2, "t_grid": [2, 3]}"#).unwrap();
    let o = mirrortail(&["run-experiment", "--config", cfg.to_str().unwrap(), "--check-signatures"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}
