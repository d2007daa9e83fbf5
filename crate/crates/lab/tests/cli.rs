use std::fs;
use std::process::{Command, Output};

use roughhj_lab::{ExperimentName, ExperimentSpec, Report};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughhj")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bound_prints_the_reference_value() {
    let o = run(&["bound", "--path", "zigzag:1,4,1", "--R", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "0.75");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = run(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn default_config_file_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t1.json");
    fs::write(&cfg, serde_json::to_string(&ExperimentSpec::new(ExperimentName::Theorem1)).unwrap()).unwrap();
    let o = run(&["experiment", "theorem1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(report.theorem_bound, Some(0.75));
    assert!(report.all_pass() && report.audit());
}

#[test]
fn zero_bound_fails_unless_vacuous_pass() {
    let o = run(&["experiment", "theorem1", "--R", "10"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bound is 0; nothing to verify"));
    let o = run(&["experiment", "theorem1", "--R", "10", "--vacuous-pass"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment": "theorem1", "colour": "blue"}"#).unwrap();
    assert_eq!(code(&run(&["experiment", "theorem1", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["experiment", "separation", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["experiment", "nonexistent"])), 2);
    assert_eq!(code(&run(&["experiment", "theorem1", "--epsilon", "1.5"])), 2);
    let o = run(&["experiment", "theorem1", "--budget", "1000"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("budget"));
    assert_eq!(code(&run(&["experiment", "crosscheck", "--L", "0.5"])), 2);
}

#[test]
fn reports_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["experiment", "constant_ball", "--out", d.path().to_str().unwrap(), "--format", "csv_bundle"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let mut names: Vec<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !n.ends_with(".timings.json"))
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n.ends_with(".csv")));
    assert!(names.contains(&"constant_ball.json".to_string()));
    for n in &names {
        assert!(fs::read(a.path().join(n)).unwrap() == fs::read(b.path().join(n)).unwrap(), "{n} differs");
    }
    assert!(a.path().join("constant_ball.timings.json").exists());
}

#[test]
fn solve_reports_point_values() {
    let o = run(&["solve", "--path", "zigzag:1,4,1", "--R", "1", "--dx", "0.04", "--points", "0,0;0.2,-0.2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"]["0,0"], 1.0);
    assert_eq!(v["engine"], "morphological");
    assert_eq!(v["segments"], 4);
}

#[test]
fn game_subcommands() {
    let o = run(&["game", "simulate", "--path", "zigzag:1,4,1", "--epsilon", "0.1", "--beta", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["final"], serde_json::json!([4.0, 4.0]));
    assert_eq!(v["payoff"], 1.0);
    let o = run(&["game", "dp", "--path", "zigzag:0.5,1,1", "--R", "2", "--dx", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 0.0);
}

#[test]
fn stored_reports_audit() {
    let o = run(&["experiment", "cancellation", "--ladder", "0.02,0.01,0.005"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut report = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(report.audit());
    report.verdicts[0].pass = !report.verdicts[0].pass;
    assert!(!report.audit());
}
