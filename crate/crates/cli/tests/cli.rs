use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOY: &str = r#"{"version": 1, "name": "toy", "sizes": [3, 3],
 "f": {"kind": "concave_sum", "terms": [{"weights": [1, 1], "phi": "sqrt"}]},
 "g": {"kind": "separable", "levels": [[0, 1, 2], [0, 1, 2]]}}"#;

const PRODUCT: &str = r#"{"version": 1, "sizes": [3, 3], "f": {"kind": "table", "values": [0, 0, 0, 0, 1, 2, 0, 2, 4]}}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticeds"))
        .args(args)
        .env_remove("LATTICEDS_CAP")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_toy_writes_trace_and_summary() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "toy.json", TOY);
    let trace = dir.path().join("trace.jsonl");
    let summary = dir.path().join("summary.csv");
    let out = bin(&[
        "solve",
        &problem,
        "--algorithm",
        "modmod",
        "--trace",
        path_str(&trace),
        "--summary",
        path_str(&summary),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["summary"]["value"], -2.0);
    assert_eq!(v["summary"]["status"], "certified_local_min");
    assert_eq!(v["certificate"]["passed"], true);

    let lines: Vec<Value> =
        fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let accepted: Vec<&Value> = lines.iter().filter(|l| l["accepted"] == true).collect();
    assert!(accepted.windows(2).all(|w| w[1]["v"].as_f64() <= w[0]["v"].as_f64()));
    assert_eq!(accepted.last().unwrap()["x"], serde_json::json!([2, 2]));
    assert_eq!(lines.last().unwrap()["x"], serde_json::json!([2, 2]));

    let mut rdr = csv::Reader::from_path(&summary).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(col("minimizer"), "2 2");
    assert_eq!(col("status"), "certified_local_min");
}

#[test]
fn every_algorithm_and_inner_solver() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "toy.json", TOY);
    for alg in ["subsup", "supsub", "modmod"] {
        for extra in [&[][..], &["--sfm", "subgrad", "--chain", "randomized", "--seed", "3"][..]] {
            let mut args = vec!["solve", problem.as_str(), "--algorithm", alg];
            args.extend_from_slice(extra);
            let out = bin(&args);
            assert!(out.status.success());
            assert_eq!(stdout_json(&out)["summary"]["value"], -2.0);
        }
    }
}

#[test]
fn budget_flag() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "toy.json", TOY);
    let out = bin(&["solve", &problem, "--budget", "2"]);
    let v = stdout_json(&out);
    assert!((v["summary"]["value"].as_f64().unwrap() - (2f64.sqrt() - 2.0)).abs() < 1e-12);
    let out = bin(&["solve", &problem, "--budget", "2", "--algorithm", "supsub"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_reports_witness_and_exit_code() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "prod.json", PRODUCT);
    let out = bin(&["check", &problem]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["f"]["submodular"]["holds"], false);
    assert_eq!(v["f"]["submodular"]["witness"]["point"], serde_json::json!([0, 0]));

    let toy = write(&dir, "toy.json", TOY);
    assert_eq!(bin(&["check", &toy]).status.code(), Some(0));

    let out = bin(&["solve", &problem]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
}

#[test]
fn parse_errors_and_cap() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"version": 1, "sizes": [1]}"#);
    let out = bin(&["solve", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");

    let toy = write(&dir, "toy.json", TOY);
    let out = bin(&["--cap", "4", "oracle", &toy]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_latticeds"))
        .args(["oracle", &toy])
        .env("LATTICEDS_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_decompose_bounds() {
    let dir = TempDir::new().unwrap();
    let toy = write(&dir, "toy.json", TOY);
    let v = stdout_json(&bin(&["oracle", &toy]));
    assert_eq!(v["value"], -2.0);
    assert_eq!(v["minimizer"], serde_json::json!([2, 2]));

    let v = stdout_json(&bin(&["decompose", &toy]));
    assert_eq!(v["dr_residual"]["holds"], true);
    assert!(v["additive_bounds"]["bound2"].as_f64().unwrap() <= -2.0);

    let out = bin(&["bounds", &toy, "--at", "1,1", "--variant", "tight1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["upper_bound_f"]["values"].as_array().unwrap().len(), 9);
    assert_eq!(v["chain"].as_array().unwrap().len(), 4);
    assert_eq!(bin(&["bounds", &toy, "--at", "5,1"]).status.code(), Some(1));
}

#[test]
fn bench_gaps_are_never_negative() {
    let dir = TempDir::new().unwrap();
    let summary = dir.path().join("bench.csv");
    for kind in ["coverage", "concave_of_linear_sums", "random_table_autosplit"] {
        let out = bin(&["bench", "--kind", kind, "--count", "4", "--sizes", "3,3", "--summary", path_str(&summary)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        for s in v["stats"].as_array().unwrap() {
            assert_eq!(s["negative_gaps"], 0);
            assert_eq!(s["runs"], 4);
        }
        let rows = csv::Reader::from_path(&summary).unwrap().records().count();
        assert_eq!(rows, 12);
    }
    let out = bin(&["bench", "--sizes", "30,30,30"]);
    assert_eq!(out.status.code(), Some(3));
}
