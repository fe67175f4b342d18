use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn otmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otmatch")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn gen(dir: &Path, file: &str, args: &[&str]) -> (String, Value) {
    let path = dir.join(file).display().to_string();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    let summary = stdout_json(&otmatch(&all));
    (path, summary)
}

fn prediction(summary: &Value, alg: Option<&str>, metric: &str) -> u64 {
    summary["predictions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["algorithm"].as_str() == alg && p["metric"] == metric)
        .and_then(|p| p["value"].as_u64())
        .unwrap()
}

#[test]
fn gen_reports_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let (path, summary) = gen(dir.path(), "t.json", &["triangle", "--n", "3"]);
    assert_eq!(summary["jobs"], 8);
    assert_eq!(prediction(&summary, Some("ff"), "total_reassignments"), 12);
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("\"kind\":\"interval\""));
}

#[test]
fn run_reports_exact_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let (path, summary) = gen(dir.path(), "tt.json", &["two-type", "--delta", "4"]);
    assert_eq!(prediction(&summary, None, "opt_size"), 10);

    let ff = stdout_json(&otmatch(&["run", "--alg", "ff", "--in", &path]));
    assert_eq!(ff["assigned"], 7);
    assert_eq!(ff["opt"], 10);
    assert_eq!(ff["ratio"], "7/10");
    assert_eq!(ff["ratio_decimal"], "0.700000");

    let log = dir.path().join("log.json");
    let edf = stdout_json(&otmatch(&["run", "--alg", "edf", "--in", &path, "--log", log.to_str().unwrap()]));
    assert_eq!(edf["assigned"], 10);
    assert_eq!(edf["ratio"], "1/1");
    let log: Value = serde_json::from_str(&std::fs::read_to_string(log).unwrap()).unwrap();
    assert_eq!(log["outcomes"].as_array().unwrap().len(), 10);
}

#[test]
fn kff_on_separation_family() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = gen(dir.path(), "k.json", &["kff-sep", "--k", "3"]);
    let row = stdout_json(&otmatch(&["run", "--alg", "kff:1", "--in", &path]));
    assert_eq!((row["assigned"].as_u64(), row["opt"].as_u64()), (Some(4), Some(5)));
    let row = stdout_json(&otmatch(&["run", "--alg", "ff", "--in", &path]));
    assert_eq!(row["assigned"], 5);
}

#[test]
fn opt_and_debatch() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = gen(dir.path(), "k.json", &["kff-sep", "--k", "3"]);
    let opt = stdout_json(&otmatch(&["opt", "--in", &path]));
    assert_eq!(opt["size"], 5);
    let out = dir.path().join("d.json");
    let status = otmatch(&["debatch", "--in", &path, "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    let opt = stdout_json(&otmatch(&["opt", "--in", out.to_str().unwrap()]));
    assert!(opt["size"].as_u64().unwrap() >= 5);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = gen(dir.path(), "t.json", &["triangle", "--n", "2"]);
    assert_eq!(otmatch(&["run", "--alg", "bogus", "--in", &path]).status.code(), Some(2));
    assert_eq!(otmatch(&["run", "--alg", "kff:0", "--in", &path]).status.code(), Some(2));
    assert_eq!(otmatch(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(otmatch(&["verify", "--only", "no-such-group"]).status.code(), Some(2));
}

#[test]
fn bad_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"interval","jobs":[{"r":5,"a":3,"d":2}]}"#).unwrap();
    let out = otmatch(&["run", "--alg", "ff", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid instance"));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(otmatch(&["opt", "--in", bad.to_str().unwrap()]).status.code(), Some(3));
    let missing = dir.path().join("missing.json");
    assert_eq!(otmatch(&["opt", "--in", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn adversary_triplets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("transcript.json");
    let summary = stdout_json(&otmatch(&[
        "adversary", "--alg", "ff", "--family", "triplets", "--blocks", "4", "--out", out.to_str().unwrap(),
    ]));
    assert_eq!(summary["alg_assigned"], 8);
    assert_eq!(summary["opt_size"], 12);
    assert_eq!(summary["ratio"], "2/3");
    assert!(out.exists());
    let summary = stdout_json(&otmatch(&["adversary", "--alg", "edf", "--family", "uniform"]));
    assert_eq!((summary["alg_assigned"].as_u64(), summary["opt_size"].as_u64()), (Some(4), Some(6)));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = otmatch(&[
        "sweep", "--family", "two-type", "--param-range", "delta=2..4", "--algs", "ff,edf", "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,params,alg,assigned,opt,ratio_num,ratio_den,reassignments");
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[5], "two-type,delta=4,ff,7,10,7,10,0");
    assert!(lines[6].starts_with("two-type,delta=4,edf,10,10,1,1,"));
}

#[test]
fn sweep_thread_count_does_not_change_output() {
    let args = ["sweep", "--family", "triangle", "--param-range", "n=1..5", "--algs", "ff,ff:lexmax,edf"];
    let one = Command::new(env!("CARGO_BIN_EXE_otmatch")).args(args).env("OTMATCH_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_otmatch")).args(args).env("OTMATCH_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_otmatch")).args(args).env("OTMATCH_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_filtered_groups() {
    let out = otmatch(&["verify", "--fast", "--only", "two-type", "--only", "kff-sep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
    assert!(text.contains("kff-sep"));
}

#[test]
fn verify_reports_right_triangle_mismatch() {
    let out = otmatch(&["verify", "--fast", "--only", "triangle-right"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn gen_random_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["random", "--seed", "7", "--n", "6", "--kind", "interval"];
    let (a, _) = gen(dir.path(), "a.json", &args);
    let (b, _) = gen(dir.path(), "b.json", &args);
    let a = std::fs::read_to_string(a).unwrap();
    assert_eq!(a, std::fs::read_to_string(b).unwrap());
    let inst: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(inst["jobs"].as_array().unwrap().len(), 6);
}
