use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sumlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, config: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.display().to_string()
}

fn l2(n: usize) -> Value {
    json!({"dim": n, "exponent": 2})
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn estimate_norm_hilbert_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "seed": 1,
        "operator": {"matrix": identity(3), "domain": l2(3), "codomain": l2(3)},
        "params": {"kind": "p_summing", "p": 2}
    });
    let path = write_config(dir.path(), "c.json", &config);
    let out = sumlab(&["estimate-norm", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("estimate.json"));
    let estimate = &report["estimates"][0];
    assert!((estimate["value"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(estimate["certification"], "exact");
    assert_eq!(estimate["diagnostics"]["method"], "hilbert_schmidt");
}

#[test]
fn estimate_norm_zero_operator() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "seed": 1,
        "operator": {"matrix": [[0.0, 0.0]], "domain": {"dim": 2, "exponent": "inf"}, "codomain": {"dim": 1, "exponent": 1}},
        "params": {"kind": "p_sigma", "p": 1, "sigma": 0.5}
    });
    let path = write_config(dir.path(), "c.json", &config);
    let out = sumlab(&["estimate-norm", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("estimate.json"))["estimates"][0]["value"], 0.0);
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let sigma_one = json!({
        "seed": 1,
        "operator": {"matrix": identity(2), "domain": l2(2), "codomain": l2(2)},
        "params": {"kind": "p_sigma", "p": 1, "sigma": 1.0}
    });
    let out = sumlab(&["estimate-norm", "--config", &write_config(dir.path(), "a.json", &sigma_one), "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params"));

    let bad_weight = json!({
        "seed": 1,
        "operator": {"matrix": identity(2), "domain": {"dim": 2, "exponent": 2, "weights": [1, -1]}, "codomain": l2(2)},
        "params": {"kind": "p_summing", "p": 2}
    });
    let out = sumlab(&["estimate-norm", "--config", &write_config(dir.path(), "b.json", &bad_weight), "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("operator.domain"), "{}", String::from_utf8_lossy(&out.stderr));

    let no_seed = json!({"params": {"kind": "p_summing", "p": 2}});
    let out = sumlab(&["estimate-norm", "--config", &write_config(dir.path(), "c.json", &no_seed), "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let out = sumlab(&["verify", "--suite", "nope", "--config", &write_config(dir.path(), "d.json", &json!({"seed": 1})), "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({"seed": 9, "instances": 20});
    let path = write_config(dir.path(), "c.json", &config);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for target in [&a, &b] {
        let out = sumlab(&["verify", "--suite", "leinc", "--config", &path, "--out", target.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let lines = std::fs::read_to_string(a.join("leinc.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 100);
    assert_eq!(lines, std::fs::read_to_string(b.join("leinc.jsonl")).unwrap());
    assert_eq!(std::fs::read(a.join("leinc.csv")).unwrap(), std::fs::read(b.join("leinc.csv")).unwrap());
    let mut ra = read_json(&a.join("leinc-report.json"));
    let mut rb = read_json(&b.join("leinc-report.json"));
    ra["wall_time_seconds"] = json!(0);
    rb["wall_time_seconds"] = json!(0);
    assert_eq!(ra, rb);
    let header = std::fs::read_to_string(a.join("leinc.csv")).unwrap();
    assert!(header.starts_with("check,lhs,rhs,C,margin,pass,seed\n"));
}

#[test]
fn verify_hilbert_and_prinint() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({"seed": 3, "instances": 4, "search": {"restarts": 16}});
    let path = write_config(dir.path(), "c.json", &config);
    for suite in ["hilbert", "prinint"] {
        let out = sumlab(&["verify", "--suite", suite, "--config", &path, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // instance 0 of prinint has n = 1: exact identities
    let first: Value = serde_json::from_str(
        std::fs::read_to_string(dir.path().join("prinint.jsonl")).unwrap().lines().next().unwrap(),
    )
    .unwrap();
    assert_eq!(first["lhs"], first["rhs"]);
    let basis = std::fs::read_to_string(dir.path().join("hilbert.jsonl")).unwrap();
    assert!(basis.contains("hilbert_basis"));
}

#[test]
fn failures_exit_1_and_counterexamples_replay() {
    let dir = tempfile::tempdir().unwrap();
    // a negative tolerance makes every identity fail
    let config = json!({"seed": 5, "instances": 2, "tolerances": {"identity": -1.0}});
    let path = write_config(dir.path(), "c.json", &config);
    let out_dir = dir.path().join("run");
    let out = sumlab(&["verify", "--suite", "prinint", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let replay = out_dir.join("prinint-counterexample-1.json");
    let replay_config = read_json(&replay);
    assert_eq!(replay_config["index"], 1);
    assert_eq!(replay_config["instance"]["suite"], "prinint");

    let again = dir.path().join("again");
    let out = sumlab(&["verify", "--suite", "prinint", "--config", replay.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let original: Vec<String> = std::fs::read_to_string(out_dir.join("prinint.jsonl")).unwrap().lines().map(String::from).collect();
    let replayed = std::fs::read_to_string(again.join("prinint.jsonl")).unwrap();
    let from_index_1: Vec<&String> = original.iter().filter(|l| l.contains("\"instance\":1")).collect();
    assert_eq!(replayed.lines().collect::<Vec<_>>(), from_index_1.iter().map(|s| s.as_str()).collect::<Vec<_>>());
}

fn sweep_function() -> Value {
    json!({
        "space": {"dim": 2, "exponent": "inf"},
        "cells": [
            {"mass": 0.3, "value": [1.0, -0.5]},
            {"mass": 0.2, "value": [0.25, 2.0]},
            {"mass": 0.5, "value": [-1.5, 0.75]}
        ]
    })
}

#[test]
fn sweep_monotone_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "seed": 2,
        "function": sweep_function(),
        "operator": {"matrix": [[1.0, 0.5], [0.0, 2.0]], "domain": {"dim": 2, "exponent": "inf"}, "codomain": {"dim": 2, "exponent": 1}},
        "p": 1.0,
        "sigma_grid": [0.0, 0.5, 0.9]
    });
    let path = write_config(dir.path(), "c.json", &config);
    let out = sumlab(&["sweep", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let phis: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(phis.len(), 3);
    assert!(phis.windows(2).all(|w| w[0] <= w[1]));
    assert!(csv.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn sweep_constant_function_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let constant = json!({
        "space": l2(2),
        "cells": [{"mass": 0.5, "value": [3.0, 4.0]}, {"mass": 0.5, "value": [3.0, 4.0]}]
    });
    let config = json!({"seed": 2, "function": constant, "p": 2.0, "sigma_grid": [0.0, 0.25, 0.5, 1.0]});
    let path = write_config(dir.path(), "c.json", &config);
    let out = sumlab(&["sweep", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let phi: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((phi - 5.0).abs() < 1e-10, "{line}");
    }

    let empty = json!({"seed": 2, "function": sweep_function(), "p": 1.0, "sigma_grid": []});
    let out = sumlab(&["sweep", "--config", &write_config(dir.path(), "e.json", &empty), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_grid"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.json", &json!({"seed": 1, "instances": 3}));
    let run = |seed: &str, sub: &str| {
        let target = dir.path().join(sub);
        let out = sumlab(&["verify", "--suite", "q11", "--config", &path, "--seed", seed, "--out", target.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read_to_string(target.join("q11.jsonl")).unwrap()
    };
    let a = run("11", "a");
    assert!(a.contains("\"seed\":11"));
    assert_ne!(a, run("12", "b"));
}
