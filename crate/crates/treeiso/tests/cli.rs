use std::process::{Command, Output};

use serde_json::Value;

fn treeiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeiso")).args(args).env_remove("TREEISO_PRECISION").output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = treeiso(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn column(doc: &Value, key: &str) -> Vec<String> {
    doc["results"].as_array().unwrap().iter().map(|r| r[key].as_str().map(String::from).unwrap_or_else(|| r[key].to_string())).collect()
}

#[test]
fn exact_examples() {
    assert_eq!(column(&json(&["exact", "--model", "labeled", "--n", "3"]), "value"), ["5/9"]);
    assert_eq!(column(&json(&["exact", "--model", "labeled", "--n", "1"]), "value"), ["1"]);
    assert_eq!(column(&json(&["exact", "--model", "ub", "--n", "4"]), "value"), ["3/8"]);
    assert_eq!(column(&json(&["exact", "--D", "0,1,2", "--w", "1,1,1", "--n", "4"]), "value"), ["3/8"]);
    assert_eq!(column(&json(&["exact", "--model", "plane", "--n", "3"]), "value"), ["1/2"]);
    // Parity: no binary tree with an even number of vertices.
    assert_eq!(column(&json(&["exact", "--model", "binary", "--n", "4"]), "value"), ["null"]);
}

#[test]
fn exact_dump_lists_classes() {
    let doc = json(&["exact", "--model", "labeled", "--n", "3", "--dump-classes"]);
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    let mut auts: Vec<&str> = classes.iter().map(|c| c["aut"].as_str().unwrap()).collect();
    auts.sort();
    assert_eq!(auts, ["1", "2"]);
    assert_eq!(treeiso(&["exact", "--model", "labeled", "--n", "3", "--dump-classes", "--format", "csv"]).status.code(), Some(4));
}

#[test]
fn series_examples() {
    let d = json(&["series", "--family", "polya", "--t", "0", "--order", "6"]);
    assert_eq!(column(&d, "coefficient"), ["1", "1", "2", "4", "9", "20"]);
    assert!(column(&d, "agrees").iter().all(|a| a == "true"));
    assert_eq!(column(&json(&["series", "--family", "ub", "--t", "1", "--order", "5"]), "coefficient"), ["1", "1", "2", "4", "9"]);
    assert_eq!(column(&json(&["series", "--family", "polya", "--t", "2", "--order", "3"]), "coefficient"), ["1", "1", "5/4"]);
    let d = json(&["series", "--family", "degree", "--D", "0,1,2", "--w", "1,1,1", "--t", "2", "--order", "4"]);
    assert_eq!(column(&d, "coefficient"), ["1", "1", "2", "6"]);
}

#[test]
fn series_real_parameter_uses_precision() {
    let d = json(&["series", "--t", "1/2", "--order", "3", "--precision", "128", "--digits", "12"]);
    assert_eq!(d["config"]["precision"], 128);
    let c = column(&d, "coefficient");
    // [x^3]P(x,1/2) = 1 + 2^{-1/2}.
    assert!(c[2].starts_with("1.7071067811"), "{c:?}");
    assert_eq!(column(&d, "oracle"), ["null", "null", "null"]);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_treeiso"))
        .args(["series", "--t", "1/2", "--order", "2"])
        .env("TREEISO_PRECISION", "96")
        .output()
        .unwrap();
    let d: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["config"]["precision"], 96);
    let bad = Command::new(env!("CARGO_BIN_EXE_treeiso"))
        .args(["series", "--t", "1/2", "--order", "2"])
        .env("TREEISO_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn mc_examples() {
    let d = json(&["mc", "--model", "labeled", "--n", "3", "--samples", "1000000", "--seed", "7"]);
    let r = &d["results"][0];
    for key in ["n", "model", "estimate", "ci_low", "ci_high", "samples", "seed"] {
        assert!(!r[key].is_null(), "{key}");
    }
    let (lo, hi) = (r["ci_low"].as_f64().unwrap(), r["ci_high"].as_f64().unwrap());
    assert!(lo <= 5.0 / 9.0 && 5.0 / 9.0 <= hi);
    assert_eq!(r["exact"], "5/9");

    let d = json(&["mc", "--model", "labeled", "--n", "1", "--samples", "1000"]);
    assert_eq!(d["results"][0]["estimate"].as_f64(), Some(1.0));

    let out = treeiso(&["mc", "--model", "ub", "--n", "8", "--samples", "1000000", "--strict"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mc_output_is_reproducible_across_worker_counts() {
    let a = treeiso(&["mc", "--model", "ub", "--n", "5..6", "--samples", "150000", "--seed", "3", "--workers", "1", "--format", "jsonl"]);
    let b = treeiso(&["mc", "--model", "ub", "--n", "5..6", "--samples", "150000", "--seed", "3", "--workers", "2", "--format", "jsonl"]);
    let strip = |o: &Output| String::from_utf8(o.stdout.clone()).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn asym_examples() {
    let d = json(&["asym", "--which", "labeled"]);
    let get = |d: &Value, name: &str| d["results"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()["value"].as_f64().unwrap();
    assert!((get(&d, "A") - 2.397678).abs() < 1e-4);
    assert!((get(&d, "c_l") - 0.354379).abs() < 1e-5);
    let d = json(&["asym", "--which", "ub"]);
    assert!((get(&d, "C") - 1.279101).abs() < 1e-4);
    assert!((get(&d, "delta") - 0.412681).abs() < 1e-5);
    let d = json(&["asym", "--which", "logweight", "--model", "binary121"]);
    assert!((get(&d, "mu") - 0.444518).abs() < 1e-4);
    assert!((get(&d, "sigma2") - 0.072413).abs() < 1e-3);
}

#[test]
fn asym_breach_exits_with_tolerance_code() {
    // A truncation this coarse moves A by far more than 1e-4.
    let out = treeiso(&["asym", "--which", "labeled", "--order", "8", "--nested-degree", "4"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let d: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["results"][0]["ok"], false);
}

#[test]
fn plane_decay_csv() {
    let out = treeiso(&["experiment", "plane-decay", "--n-max", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "n,plane_trees,q,q_decimal,rate");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[4][1], "14");
}

#[test]
fn enumerate_csv_columns_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let run = || treeiso(&["enumerate", "--model", "ub", "--n", "9", "--format", "csv", "--cache-dir", cache]);
    let first = run();
    assert!(first.status.success());
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let second = run();
    assert_eq!(first.stdout, second.stdout);
    let uncached = treeiso(&["enumerate", "--model", "ub", "--n", "9", "--format", "csv"]);
    let body = |o: &Output| String::from_utf8(o.stdout.clone()).unwrap().lines().skip(1).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&first), body(&uncached));
    let b = body(&first);
    assert_eq!(b[0], "code_hex,n,aut,pr,weight_num,weight_den");
    let counts = treeiso_core::enumerate::class_counts(9, &treeiso_core::model::DegreeModel::unary_binary(), &Default::default()).unwrap();
    assert_eq!((b.len() - 1) as u64, counts[8]);
}

#[test]
fn enumerate_jsonl_default() {
    let out = treeiso(&["enumerate", "--model", "labeled", "--n", "5"]);
    let lines: Vec<Value> = String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0]["config"].is_object());
    assert_eq!(lines.len(), 1 + 9);
    let cayley: u64 = lines[1..].iter().map(|r| 120 / r["aut"].as_str().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(cayley, 625);
}

#[test]
fn exact_runs_are_byte_identical() {
    let a = treeiso(&["exact", "--model", "binary121", "--n", "3..9", "--format", "csv"]);
    let b = treeiso(&["exact", "--model", "binary121", "--n", "3..9", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = treeiso(&["exact", "--model", "labeled", "--n", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(d["config"]["output"], path.to_str().unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(treeiso(&["exact", "--model", "labeled", "--n", "40"]).status.code(), Some(3));
    assert_eq!(treeiso(&["exact", "--model", "martian", "--n", "4"]).status.code(), Some(4));
    assert_eq!(treeiso(&["exact", "--D", "1,2", "--n", "4"]).status.code(), Some(4));
    assert_eq!(treeiso(&["exact", "--D", "0,2", "--w", "1,-1", "--n", "3"]).status.code(), Some(4));
    assert_eq!(treeiso(&["mc", "--model", "binary", "--n", "4", "--samples", "10"]).status.code(), Some(4));
    assert_eq!(treeiso(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(treeiso(&["--help"]).status.code(), Some(0));
    assert_eq!(treeiso(&["enumerate", "--model", "ub", "--n", "30"]).status.code(), Some(3));
}
