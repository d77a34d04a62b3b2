use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn flat3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flat3"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const EXP_FAMILY: &str = r#"{
  "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]},
  "f1": "exp(x1)", "f2": "1", "f3": "1/(exp(-x1) + 1)"
}"#;

const WARPED_SQUARE: &str = r#"{
  "box": {"lo": [-3, -3, -3], "hi": [3, 3, 3]},
  "f1": "1", "f2": "1", "f3": "1/(x1*x1 + 1)"
}"#;

#[test]
fn curvature_at_a_point() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", WARPED_SQUARE);
    let o = flat3(&["curvature", "--metric", &m, "--point", "1,0.5,0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let ric = v["ric"].as_array().unwrap();
    assert_eq!(ric.len(), 3);
    assert!((ric[0][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(v.get("riemann").is_none());

    let o = flat3(&[
        "curvature",
        "--metric",
        &m,
        "--point",
        "1,0,0",
        "--point",
        "-1,0,0",
        "--riemann",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["riemann"].as_array().unwrap().len(), 3);
}

#[test]
fn curvature_errors() {
    let dir = TempDir::new().unwrap();
    let missing = write(
        &dir,
        "bad.json",
        r#"{"box": {"lo": [0,0,0], "hi": [1,1,1]}, "f1": "1", "f2": "1"}"#,
    );
    let o = flat3(&["curvature", "--metric", &missing, "--point", "0.5,0.5,0.5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("metric.f3 required"), "{}", stderr(&o));

    let m = write(&dir, "m.json", WARPED_SQUARE);
    let o = flat3(&["curvature", "--metric", &m, "--point", "4,0,0"]);
    assert_eq!(code(&o), 3);

    let o = flat3(&["curvature", "--metric", &m, "--point", "1,2"]);
    assert_eq!(code(&o), 2);
    let o = flat3(&["curvature", "--metric", "/nonexistent/m.json", "--point", "0,0,0"]);
    assert_eq!(code(&o), 2);
    let o = flat3(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_reports_flat_and_not_flat() {
    let dir = TempDir::new().unwrap();
    let flat = write(&dir, "flat.json", EXP_FAMILY);
    let report = dir.path().join("r.json");
    let o = flat3(&[
        "check",
        "--metric",
        &flat,
        "--tol",
        "1e-8",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["flat"], true);
    assert_eq!(r["grid"]["n"], 17);
    assert_eq!(r["points"], 17 * 17 * 17);
    assert_eq!(r["tol"], 1e-8);

    let curved = write(&dir, "curved.json", WARPED_SQUARE);
    let o = flat3(&["check", "--metric", &curved]);
    assert_eq!(code(&o), 1);
    let r = stdout_json(&o);
    assert_eq!(r["flat"], false);
    // Ric(E1,E1) = -w''/w = -2/(x1^2 + 1), which is -2 at the grid center
    assert!(r["max_ric"].as_f64().unwrap() >= 1.9);
}

#[test]
fn check_needs_a_window_on_unbounded_boxes() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"box": {"lo": ["-inf", 0, 0], "hi": ["inf", 1, 1]}, "f1": "1", "f2": "1", "f3": "1"}"#,
    );
    let o = flat3(&["check", "--metric", &m]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unbounded"));
    let o = flat3(&[
        "check",
        "--metric",
        &m,
        "--window",
        "-5,5:-inf,inf:-inf,inf",
        "--grid",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = flat3(&["check", "--metric", &m, "--window", "-5,5", "--grid", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn check_csv_output() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", EXP_FAMILY);
    let csv = dir.path().join("pts.csv");
    let o = flat3(&[
        "check",
        "--metric",
        &m,
        "--grid",
        "3",
        "--format",
        "csv",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("x1,x2,x3,ric11"));
    assert_eq!(lines.len(), 1 + 27);
}

#[test]
fn family_build_then_check() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c22.json");
    let o = flat3(&[
        "family",
        "build",
        "--kind",
        "C2_2",
        "--params",
        r#"{"c0":1,"c1":1,"k3":1,"c3":-1,"which":3}"#,
        "--box",
        "-1,1:-1,1:-1,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file["family"]["kind"], "C2_2");
    let o = flat3(&["check", "--metric", out.to_str().unwrap(), "--tol", "1e-8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["spec"]["family"]["kind"], "C2_2");
}

#[test]
fn family_build_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"kind": "T3_3", "params": {"c1": 1, "c2": 1, "c3": 0}, "box": {"lo": [0,0,0], "hi": [2,2,1]}}"#,
    );
    let o = flat3(&["family", "verify", "--spec", &spec]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["spec"]["kind"], "T3_3");
}

#[test]
fn family_verify_sequential_example() {
    let o = flat3(&[
        "family",
        "verify",
        "--kind",
        "T3_7_6",
        "--params",
        r#"{"k2":1,"k3":1,"c2":-1,"c3":0}"#,
        "--box",
        "0,2:-1.5,1.5:0,1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["flat"], true);
}

#[test]
fn family_errors() {
    let o = flat3(&[
        "family",
        "build",
        "--kind",
        "T2_8_6",
        "--params",
        r#"{"k1":1,"f1":{"z0":0,"x0":0},"f3":{"z0":1,"x0":0}}"#,
        "--box",
        "-0.3,0.3:-0.3,0.3:-0.3,0.3",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("NonFiniteLimit"), "{}", stderr(&o));

    let o = flat3(&["family", "build", "--kind", "T4_1", "--params", "{}"]);
    assert_eq!(code(&o), 2);
    let o = flat3(&["family", "build", "--kind", "T3_1", "--params", r#"{"k":1,"zz":2}"#]);
    assert_eq!(code(&o), 2);
    let o = flat3(&["family", "build", "--kind", "T3_1", "--params", "{not json"]);
    assert_eq!(code(&o), 2);
    let o = flat3(&["family", "build", "--kind", "T3_1", "--params", "{}"]);
    assert_eq!(code(&o), 2);
    // c3 = 0.5 inside I1 = (0, 1)
    let o = flat3(&[
        "family",
        "build",
        "--kind",
        "C2_3",
        "--params",
        r#"{"k1":1,"k3":1,"c3":0.5,"which":3}"#,
        "--box",
        "0,1:0,1:0,1",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("c3_outside_I1"), "{}", stderr(&o));
}

#[test]
fn family_exists() {
    let o = flat3(&["family", "exists", "--kind", "warped_r2xr", "--box", "inf"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["exists"], false);
    assert!(v["obstruction"].as_str().unwrap().contains("c1 = c2 = 0"));

    let o = flat3(&["family", "exists", "--kind", "warped_r2xr", "--box", "0,2:0,2:0,1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["witness"]["kind"], "T3_3");
    assert_eq!(v["witness"]["params"]["c1"], 1.0);

    let o = flat3(&["family", "exists", "--kind", "nonsense", "--box", "inf"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn family_list_names_every_kind() {
    let o = flat3(&["family", "list", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["kinds"].as_array().unwrap().len(), 37);
    let o = flat3(&["family", "list"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["T2_1_2", "C2_2", "T2_8_6", "T3_7_7", "T3_8"] {
        assert!(text.contains(id));
    }
}

/// Every kind's listed example verifies flat through the CLI.
#[test]
fn every_listed_example_verifies() {
    let list = stdout_json(&flat3(&["family", "list", "--json"]));
    for k in list["kinds"].as_array().unwrap() {
        let id = k["kind"].as_str().unwrap();
        let params = k["example"].to_string();
        let b = k["example_box"].as_str().unwrap();
        let o = flat3(&[
            "family", "verify", "--kind", id, "--params", &params, "--box", b, "--grid", "7",
        ]);
        assert_eq!(code(&o), 0, "{id}: {}", stderr(&o));
    }
}

#[test]
fn thread_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", EXP_FAMILY);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_flat3"))
            .args(["check", "--metric", &m, "--grid", "5"])
            .env("FLAT3_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(code(&one), 0);
    // the report does not depend on the worker count
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
    assert!(Path::new(env!("CARGO_BIN_EXE_flat3")).exists());
}
