use std::collections::BTreeSet;
use std::path::Path;

use serde_json::Value;
use sideband::cli::{main_with_args, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["sideband".to_string(), "--out".into(), dir.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    main_with_args(argv)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const RANDOM_PULSE: &str = r#"{"schema": 1, "pulse": {"m": 10, "n": 4, "delta": 0.17,
  "f": [0.3, -1.1, 0.4, 0.9, 1.8, -0.2, 0.6, -0.7, 0.25],
  "eta": [0.05, 0.04, 0.06, 0.05, 0.05, 0.03, 0.05, 0.07, 0.05], "f_tg": 0.1}}"#;

#[test]
fn simulate_starts_in_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), r#"{"schema": 1, "problem": {"n": 5}, "cycles": 0.05}"#);
    assert_eq!(run(dir.path(), &["simulate", "--spec", &spec]), EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    let col = header.iter().position(|h| *h == "p_g1").unwrap();
    assert_eq!(first[col], 1.0);
    assert_eq!(header.last(), Some(&"leakage"));
}

#[test]
fn verify_magnus_reports_every_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), RANDOM_PULSE);
    assert_eq!(run(dir.path(), &["verify-magnus", "--spec", &spec]), EXIT_OK);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_magnus.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 19);
    for c in checks {
        assert!(c["rel_err"].as_f64().unwrap() < 1e-8, "{c}");
    }
}

#[test]
fn sweep_writes_the_improvement_table() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["sweep-n", "--set", "ns=[6]"]), EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,R_cycle,R_theory,I_mono,I_poly,delta_opt,feasible");
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 6.0);
    assert!((1.3..=2.1).contains(&row[1]), "R = {}", row[1]);
}

#[test]
fn reruns_are_byte_identical_and_fully_listed() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let spec = write_spec(d.path(), RANDOM_PULSE);
        assert_eq!(run(d.path(), &["coeffs", "--spec", &spec]), EXIT_OK);
        assert_eq!(run(d.path(), &["figure", "fig5", "--set", "cycles=0.1", "--grid", "40"]), EXIT_OK);
    }
    for name in ["fig5.csv", "coeffs.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let m = manifest(dirs[0].path());
    assert_eq!(m["schema"], 1);
    assert_eq!(m["exit_code"], 0);
    let listed: BTreeSet<String> =
        m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect();
    assert_eq!(listed, BTreeSet::from(["fig5.csv".to_string()]));
    let header = std::fs::read_to_string(dirs[0].path().join("fig5.csv")).unwrap();
    assert!(header.starts_with("t,p_g1_exact,p_g1_zeroth,p_g1_first,p_g1_second,p_e0_exact"));
}

#[test]
fn figure_three_is_windowed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["figure", "fig3", "--set", "pulse=monochromatic", "--grid", "50"]), EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let t: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    let period = 2.0 * std::f64::consts::PI;
    assert!((t[0] - 7.8 * period).abs() < 1e-9);
    assert!((t[t.len() - 1] - 8.2 * period).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["optimize", "--set", "problem.bogus=1"]), EXIT_USAGE);
    assert_eq!(run(dir.path(), &["teleport"]), EXIT_USAGE);
    let spec = write_spec(dir.path(), r#"{"problem": {"n": 3}}"#);
    assert_eq!(run(dir.path(), &["optimize", "--spec", &spec]), EXIT_USAGE);
    assert_eq!(run(dir.path(), &["simulate", "--set", "initial=x7"]), EXIT_USAGE);
}

#[test]
fn infeasible_optimization_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["optimize", "--set", "problem.n=0"]), EXIT_INFEASIBLE);
    let m = manifest(dir.path());
    assert_eq!(m["exit_code"], EXIT_INFEASIBLE);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("optimize.json").exists());
}
