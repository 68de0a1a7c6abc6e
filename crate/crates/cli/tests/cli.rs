//! Black-box checks of the malle binary: JSON shapes, CSV emission, the
//! abelian oracle cross-check and the failure path for bad catalog files.

use std::fs;
use std::process::{Command, Output};

use malle_core::catalog::{builtin, to_json, NAMES};
use serde_json::Value;

fn malle() -> Command {
    Command::new(env!("CARGO_BIN_EXE_malle"))
}

fn parse_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn census_reports_q8_constants() {
    let out = malle().args(["group", "info", "Q8", "--d", "1"]).output().unwrap();
    let v = parse_stdout(&out);
    let r = &v["report"];
    assert_eq!(r["name"], "Q8");
    assert_eq!(r["order"], 8);
    assert_eq!(r["l"], 2);
    assert_eq!(r["a"], "1/4");
    assert_eq!(r["b"], 1);
    assert_eq!(r["i"], 1);
    assert_eq!(r["involutions"], 1);
    assert_eq!(v["run"]["seed"], 0);
}

#[test]
fn group_list_covers_the_whole_catalog() {
    let out = malle().args(["group", "list"]).output().unwrap();
    let v = parse_stdout(&out);
    let rows = v["report"].as_array().expect("array report");
    assert_eq!(rows.len(), NAMES.len());
    let names: Vec<&str> = rows.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"Heis27"));
    assert!(names.contains(&"U64"));
}

#[test]
fn exact_count_discs_match_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let count_csv = dir.path().join("count.csv");
    let oracle_csv = dir.path().join("oracle.csv");
    let out = malle()
        .args(["count", "--group", "C2", "--mode", "exact", "--X", "10000", "--two-unramified"])
        .arg("--emit-discs")
        .arg(&count_csv)
        .output()
        .unwrap();
    let report = parse_stdout(&out);
    assert_eq!(report["report"]["unknown_tuples"], 0);
    let out = malle()
        .args(["oracle", "--group", "C2", "--X", "10000", "--two-unramified"])
        .arg("--emit-discs")
        .arg(&oracle_csv)
        .output()
        .unwrap();
    let summary = parse_stdout(&out);
    assert_eq!(summary["report"]["epi_count"], 4055);
    // under two-unramified the emitted height is the field discriminant
    let count_body = fs::read_to_string(&count_csv).unwrap();
    let mut counted: Vec<u64> = count_body
        .lines()
        .skip(1)
        .filter_map(|l| {
            let mut cols = l.split(',');
            let disc: u64 = cols.next().unwrap().parse().unwrap();
            (cols.next() == Some("epi")).then_some(disc)
        })
        .collect();
    counted.sort_unstable();
    let oracle_body = fs::read_to_string(&oracle_csv).unwrap();
    let oracled: Vec<u64> =
        oracle_body.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert!(oracled.windows(2).all(|w| w[0] <= w[1]), "oracle CSV is sorted");
    assert_eq!(counted, oracled);
}

#[test]
fn count_reruns_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut csvs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("discs{run}.csv"));
        let out = malle()
            .args(["count", "--group", "C4", "--mode", "exact", "--X", "50000"])
            .arg("--emit-discs")
            .arg(&path)
            .output()
            .unwrap();
        let mut v = parse_stdout(&out);
        // wall time and the csv path are the only fields allowed to differ
        v["report"]["elapsed_ms"] = 0.into();
        v["run"]["argv"] = Value::Null;
        reports.push(v);
        csvs.push(fs::read(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn corrupt_catalog_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut v: Value = serde_json::from_str(&to_json(&builtin("C4").unwrap()).unwrap()).unwrap();
    // breaks the second-level table so the identity sweep must catch it
    v["tables"][1][2] = 1.into();
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = malle().args(["group", "info"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    let msg = err["error"].as_str().unwrap();
    assert!(msg.contains("cocycle identity fails at level 2"), "got: {msg}");
}

#[test]
fn unknown_group_reports_a_json_error() {
    let out = malle().args(["count", "--group", "NOPE", "--mode", "upper", "--X", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("NOPE"));
}

#[test]
fn filter_subcommand_reports_a_tiny_residual() {
    let out = malle()
        .args(["analytic", "filter", "--l", "2", "--k", "2", "--a", "1,0", "--n", "3"])
        .output()
        .unwrap();
    let v = parse_stdout(&out);
    let r = &v["report"];
    assert_eq!(r["lhs"], 0.5);
    assert_eq!(r["main_term"], 0.5);
    assert!(r["diff"].as_f64().unwrap() < 1e-12);
}

#[test]
fn selftest_passes() {
    let out = malle().args(["selftest"]).output().unwrap();
    let v = parse_stdout(&out);
    assert_eq!(v["report"]["ok"], true);
    assert_eq!(v["report"]["reciprocity_pairs"], 500);
}
