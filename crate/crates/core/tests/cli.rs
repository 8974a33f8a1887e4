use std::path::{Path, PathBuf};
use std::process::Command;

use orlicz::discretization::{DomainSpec, KernelSpec};
use orlicz::harness::{ProblemConfig, Report, Scenario, SuiteConfig, SuiteKind};
use orlicz::phi::PhiExpression;
use orlicz::solver::SolverOptions;

fn orlicz(args: &[&str], config: Option<&Path>, out: &Path) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orlicz"));
    cmd.args(args).arg("--out").arg(out).env_remove("ORLICZ_THREADS");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap().status.code().unwrap()
}

fn problem(dir: &Path) -> PathBuf {
    let cfg = ProblemConfig {
        domain: DomainSpec::unit_interval(32),
        kernel: KernelSpec::constant_on(1.0),
        phi: PhiExpression::square(),
        u: Some("x0".into()),
        w: Some("x0^2".into()),
        g: Some("1 + x0".into()),
        u0: None,
        p_minus: None,
        p: Some(2.0),
        solver: SolverOptions::default(),
        sampling: None,
    };
    let path = dir.join("problem.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn problem_commands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = problem(dir.path());
    for cmd in ["eval", "norm", "minimize", "dual", "phi-check"] {
        let out = dir.path().join(cmd);
        assert_eq!(orlicz(&[cmd], Some(&cfg), &out), 0, "{cmd}");
        assert_eq!(json(&out.join("report.json"))["command"], cmd);
    }
    let eval = json(&dir.path().join("eval/report.json"));
    // midpoint sum of (x - y)² is (1 - h²) / 6
    assert!((eval["F"].as_f64().unwrap() - (1.0 - 1.0 / 1024.0) / 6.0).abs() < 1e-15);
    assert_eq!(eval["nodes"], 32);
    assert!((eval["G"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let norm = json(&dir.path().join("norm/report.json"));
    assert!((norm["g_norm"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    assert!(dir.path().join("minimize/tables/u_star.csv").exists());
    let kernel = std::fs::read_to_string(dir.path().join("dual/tables/dual_kernel.csv")).unwrap();
    assert_eq!(kernel.lines().count(), 1 + 32 * 32);
}

#[test]
fn norm_can_be_restricted_to_one_functional() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = problem(dir.path());
    let out = dir.path().join("h");
    assert_eq!(orlicz(&["norm", "--functional", "h"], Some(&cfg), &out), 0);
    let report = json(&out.join("report.json"));
    // h(u(x) - u(y)) is the Luxemburg norm of the F modular
    let all = dir.path().join("all");
    assert_eq!(orlicz(&["norm"], Some(&cfg), &all), 0);
    let full = json(&all.join("report.json"));
    let h = report["h_norm"].as_f64().unwrap();
    assert!((h - full["luxemburg_f"]["value"].as_f64().unwrap()).abs() < 1e-9);
    assert!(report.get("g_norm").is_none());
    assert_eq!(orlicz(&["norm", "--functional", "bogus"], Some(&cfg), &out), 2);
}

#[test]
fn suite_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SuiteConfig {
        scenarios: vec![Scenario::square_benchmark(16)],
        suites: vec![SuiteKind::Young, SuiteKind::Poincare],
        ..SuiteConfig::default()
    };
    let path = dir.path().join("suite.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    assert_eq!(orlicz(&["suite"], Some(&path), &out), 0);
    let report = Report::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.pass);
    assert_eq!(report.records.len(), 2);
    for file in ["report.md", "tables/summary.csv", "tables/timing.csv", "tables/poincare_square.csv"] {
        assert!(out.join(file).exists(), "{file}");
    }
}

#[test]
fn empty_suite_list_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    std::fs::write(&path, r#"{"scenarios": [], "suites": []}"#).unwrap();
    assert_eq!(orlicz(&["suite"], Some(&path), &dir.path().join("out")), 0);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(orlicz(&["suite"], Some(&bad), &out), 2);
    assert_eq!(orlicz(&["eval"], Some(&bad), &out), 2);
    assert_eq!(orlicz(&["eval"], None, &out), 2);
    assert_eq!(orlicz(&["norm"], Some(&dir.path().join("missing.json")), &out), 2);
    assert_eq!(orlicz(&["suite", "--threads", "0"], None, &out), 2);
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = problem(dir.path());
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(orlicz(&["eval"], Some(&cfg), &blocker.join("out")), 3);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["benchmark.json", "variable_exponent.json"] {
        let cfg = ProblemConfig::from_path(root.join(name)).unwrap();
        cfg.scenario().build().unwrap();
    }
    let suite = SuiteConfig::from_path(root.join("suite.json")).unwrap();
    suite.validate().unwrap();
    assert_eq!(suite.scenarios.len(), 2);
}
