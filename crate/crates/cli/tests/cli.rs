use std::path::Path;
use std::process::{Command, Output};

fn aperylim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aperylim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn lines_in(path: &Path) -> usize {
    std::fs::read_to_string(path).map(|s| s.lines().count()).unwrap_or(0)
}

#[test]
fn bench_zeta3_matches_constant() {
    let o = aperylim(&["bench-zeta3", "--N", "30", "--digits", "60"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    assert!(v["zeta3_agreeing_digits"].as_u64().unwrap() >= 20);
    assert_eq!(v["convergence"], "exponential");
}

#[test]
fn bench_zeta3_trace_prints_apery_numbers() {
    let o = aperylim(&["bench-zeta3", "--N", "4", "--trace"]);
    assert!(o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    let b: Vec<&str> = err.lines().map(|l| l.rsplit("B=").next().unwrap()).collect();
    assert_eq!(b, ["1", "5", "73", "1445", "33001"]);
}

#[test]
fn bench_zeta3_without_iterations() {
    let o = aperylim(&["bench-zeta3", "--N", "0"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    assert_eq!(v["digits_stable"], 0);
    assert!(v["diagnostic"].as_str().unwrap().contains("too few"));
}

#[test]
fn pipeline_catalogues_once() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("cat.jsonl");
    let cat_s = cat.to_str().unwrap();
    let args = ["pipeline", "--s", "3", "--r", "2", "--a", "1", "--N", "100", "--digits", "80", "--catalog", cat_s];
    let o = aperylim(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let entry = &json_lines(&o)[0];
    assert_eq!(entry["identification"]["coeffs"], serde_json::json!([1, 0, -3, 0, 0, 0]));
    assert_eq!(entry["identification"]["basis"], serde_json::json!(["1", "zeta2", "zeta3", "log2", "log2sq"]));
    assert_eq!(lines_in(&cat), 1);
    assert!(aperylim(&args).status.success());
    assert_eq!(lines_in(&cat), 1);

    let q = aperylim(&["catalog", "--catalog", cat_s, "--constant", "zeta2"]);
    assert_eq!(json_lines(&q).len(), 1);
    let hash = entry["hash"].as_str().unwrap();
    let q = aperylim(&["catalog", "--catalog", cat_s, "--hash", hash]);
    assert_eq!(json_lines(&q)[0]["hash"], hash);
    let q = aperylim(&["catalog", "--catalog", cat_s, "--s", "5"]);
    assert!(json_lines(&q).is_empty());
}

#[test]
fn empty_and_corrupt_catalogs() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("none.jsonl");
    let o = aperylim(&["catalog", "--catalog", cat.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    std::fs::write(&cat, "{not json\n").unwrap();
    let o = aperylim(&["catalog", "--catalog", cat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("byte offset"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("c.jsonl");
    let cat_s = cat.to_str().unwrap();
    // outside the proven range: rejected as input
    assert_eq!(aperylim(&["pipeline", "--s", "3", "--r", "3", "--catalog", cat_s]).status.code(), Some(2));
    // forced through: the miracle check fails
    let o = aperylim(&["pipeline", "--s", "4", "--r", "4", "--experimental", "--N", "40", "--digits", "30", "--catalog", cat_s]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json_lines(&o)[0]["failure"]["stage"], "miracle");
    assert_eq!(aperylim(&["identify", "--value", "1.5", "--digits", "10"]).status.code(), Some(5));
}

#[test]
fn identify_command() {
    let o = aperylim(&["identify", "--value", "0.750000000000000000000000000000", "--basis", "1", "--digits", "25"]);
    assert!(o.status.success());
    assert_eq!(json_lines(&o)[0]["value"], "3/4");
}

#[test]
fn guess_and_zeilberger_commands() {
    let o = aperylim(&["guess", "--values", "1,2,4,8,16,32,64,128,256,512,1024,2048,4096,4096", "--order", "1", "--degree", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "null");
    let o = aperylim(&["guess", "--values", "1,2,4,8,16,32,64,128,256,512,1024,2048,4096,8192", "--order", "1", "--degree", "1"]);
    assert_eq!(json_lines(&o)[0]["coeffs"], serde_json::json!([[-2], [1]]));
    let o = aperylim(&["zeilberger", "--franel", "2"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    assert_eq!(v["verified"], true);
    assert_eq!(v["recurrence"]["order"], 1);
}

#[test]
fn transform_command() {
    let o = aperylim(&["transform", "--franel", "3", "--N", "0", "--order", "2"]);
    assert!(o.status.success());
    assert_eq!(json_lines(&o)[0]["coeffs"], serde_json::json!(["1", "0", "0"]));
}
