use std::path::Path;
use std::process::{Command, Output};

fn vstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vstate")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(o: &Output, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    v[key].as_f64().unwrap()
}

#[test]
fn eigen_reports_both_speeds() {
    let o = vstate(&["eigen", "--alpha", "0.9", "--b", "0.2", "--m", "4", "--format", "json"]);
    assert!(o.status.success());
    assert!((field(&o, "omega_plus") - 0.4077).abs() < 1e-3);
    assert!((field(&o, "omega_minus") + 1.3055).abs() < 1e-3);
    let o = vstate(&["eigen", "--alpha", "0.5", "--m", "10", "--format", "json"]);
    assert!((field(&o, "omega") - 0.559238).abs() < 1e-5);
    let o = vstate(&["eigen", "--alpha", "0.5", "--b", "0.65", "--m", "4"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    let plus: f64 = values[header.iter().position(|h| *h == "omega_plus").unwrap()].parse().unwrap();
    assert!((plus - 0.1480).abs() < 1e-3);
}

#[test]
fn scalar_queries() {
    let o = vstate(&["b0", "--alpha", "0.5", "--format", "json"]);
    assert!((field(&o, "b0") - 0.7424).abs() < 5e-4);
    let o = vstate(&["threshold", "--alpha", "0.9", "--b", "0.2", "--format", "json"]);
    assert!(field(&o, "threshold") <= 4.0);
}

#[test]
fn exit_codes() {
    assert_eq!(vstate(&["eigen", "--alpha", "1.5", "--m", "4"]).status.code(), Some(2));
    assert_eq!(vstate(&["eigen", "--alpha", "0.5", "--b", "0.65", "--m", "2"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = vstate(&["solve", "--alpha", "0.5", "--m", "10", "--omega", "0.560", "--r", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let o = vstate(&["solve", "--alpha", "0.5", "--m", "4", "--omega", "0.3", "--r", "4", "--seed-a1", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_vstate")).args(["b0", "--alpha", "0.5"]).env("VSTATE_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_vstate")).args(["b0", "--alpha", "0.5"]).env("VSTATE_THREADS", "2").output().unwrap();
    assert!(o.status.success());
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_writes_state_sidecar_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = vstate(&["solve", "--alpha", "0.5", "--m", "10", "--omega", "0.556", "--r", "8", "--fast", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..4], ["omega", "residual", "iter", "a_1"]);
    assert_eq!(rows[0].len(), 3 + 31);
    assert!(rows[1][1].parse::<f64>().unwrap() < 1e-11);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["disc"]["r"], 6);
    assert_eq!(meta["config"]["tol"], 1e-11);
    assert!(meta["library_version"].is_string());
    let boundary = read_rows(&dir.path().join("s.boundary.csv"));
    assert_eq!(boundary[0], ["theta", "x", "y"]);
    assert_eq!(boundary.len(), 1 + 640);
}

#[test]
fn sweep_then_solve_from_branch_then_dump() {
    let dir = tempfile::tempdir().unwrap();
    let branch = dir.path().join("b.json");
    let o = vstate(&[
        "sweep", "--alpha", "0.5", "--b", "0.5", "--m", "4", "--omega-start", "-0.0275", "--omega-end", "-0.02",
        "--omega-step", "0.0025", "--r", "4", "--format", "json", "--out", branch.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("z.csv");
    let o = vstate(&["solve", "--in", branch.to_str().unwrap(), "--omega", "-0.015", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out);
    assert_eq!(&rows[0][..4], ["omega", "residual", "iter", "a1_1"]);
    assert!(rows[0].contains(&"a2_7".to_string()));
    let dump = dir.path().join("d.csv");
    let o = vstate(&["dump-boundary", "--in", out.to_str().unwrap(), "--out", dump.to_str().unwrap()]);
    assert!(o.status.success());
    let d = read_rows(&dump);
    assert_eq!(d[0], ["theta", "x1", "y1", "x2", "y2"]);
    assert_eq!(d.len(), 1 + 64);
}

#[test]
fn continue_without_a_fold_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let branch = dir.path().join("b.csv");
    let o = vstate(&[
        "sweep", "--alpha", "0.5", "--b", "0.65", "--m", "4", "--omega-start", "0.14", "--omega-end", "0.13",
        "--omega-step", "-0.005", "--r", "4", "--out", branch.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = vstate(&["continue", "--in", branch.to_str().unwrap(), "--out", dir.path().join("c.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn continue_through_the_three_fold() {
    let dir = tempfile::tempdir().unwrap();
    let branch = dir.path().join("b.csv");
    let o = vstate(&[
        "sweep", "--alpha", "0.9", "--m", "3", "--omega-start", "0.3407", "--omega-end", "0.1", "--omega-step", "-0.004",
        "--r", "6", "--out", branch.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("c.csv");
    let o = vstate(&["continue", "--in", branch.to_str().unwrap(), "--steps", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out);
    let n = rows[0].len();
    assert_eq!(&rows[0][n - 2..], ["lambda", "past_fold"]);
    assert_eq!(rows.len(), 1 + 9);
    assert!(rows.iter().skip(1).any(|r| r[n - 1] == "true"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.csv.json")).unwrap()).unwrap();
    assert!((meta["fold_omega"].as_f64().unwrap() - 0.21904).abs() < 1e-3);
    assert_eq!(meta["epsilon"], 1e-4);
}
