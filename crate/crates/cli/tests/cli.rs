use std::process::{Command, Output};

use serde_json::Value;

fn repfib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repfib")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn enumerate_csv_and_json_agree() {
    let csv = repfib(&["enumerate", "--k-min", "2", "--k-max", "5", "--n-max", "60"]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("k,n,value"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.starts_with("2,11,89,")));

    let json = repfib(&["enumerate", "--k-min", "2", "--k-max", "5", "--n-max", "60", "--format", "json"]);
    assert!(json.status.success());
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), rows.len());
}

#[test]
fn small_n_reports_the_three_families() {
    let o = repfib(&["small-n", "--k-probe", "8"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let values: Vec<String> =
        v["families"].as_array().unwrap().iter().map(|f| f["value"].as_str().unwrap().to_string()).collect();
    assert_eq!(values, ["16", "32", "64"]);
}

#[test]
fn verify_theorem_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = repfib(&["--out-dir", out, "verify-theorem", "--k-max", "30", "--n-max", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("PASS F_11^(2) = 89"));
    assert!(!text.contains("FAIL"));
    assert!(dir.path().join("verify-theorem.json").exists());
    assert!(dir.path().join("solutions.csv").exists());
    assert!(dir.path().join("ledger.json").exists());
}

#[test]
fn reduce_small_k_resumes_from_stage_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["--out-dir", out, "--resume", "reduce-small-k", "--k-range", "4..=5", "--n-max", "200"];
    let first = repfib(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).contains("PASS small-k-round2"));
    let rec: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("small-k-round1.json")).unwrap()).unwrap();
    for key in ["stage", "anchor", "inputs", "outputs", "precision_bits", "wall_ms"] {
        assert!(rec.get(key).is_some(), "missing {key}");
    }
    assert_eq!(rec["outputs"]["holds"], Value::Bool(true));
    let second = repfib(&args);
    assert_eq!(second.status.code(), Some(0));
    let ledger: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["stages"].as_array().unwrap().len(), 4);
}

#[test]
fn round1_only_skips_round2() {
    let o = repfib(&["reduce-small-k", "--k-range", "6", "--round1-only"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("PASS small-k-round1"));
    assert!(!text.contains("small-k-round2"));
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(repfib(&["reduce-small-k", "--k-range", "3-10"]).status.code(), Some(1));
    assert_eq!(repfib(&["reduce-small-k", "--k-range", "9-4"]).status.code(), Some(1));
    assert_eq!(repfib(&["enumerate", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(repfib(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(repfib(&["--help"]).status.code(), Some(0));
}
