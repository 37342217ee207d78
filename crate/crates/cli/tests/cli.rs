use std::path::Path;
use std::process::{Command, Output};

fn multit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multit")).args(args).output().expect("spawn multit")
}

fn ok(args: &[&str]) -> Output {
    let out = multit(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_bench_score_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.csv");
    ok(&[
        "synth",
        "--n-in",
        "120",
        "--n-out-pool",
        "120",
        "--d",
        "8",
        "--spread",
        "8",
        "--clusters",
        "3",
        "--seed",
        "4",
        "--out",
        s(&set),
    ]);
    let header = std::fs::read_to_string(&set).unwrap();
    assert!(header.starts_with("class,f0,"));
    assert_eq!(header.lines().count(), 241);

    let report = dir.path().join("report.json");
    let out = ok(&[
        "bench",
        "--features",
        s(&set),
        "--classes",
        "0",
        "--gamma-grid",
        "0.1,0.2",
        "--seeds-per-cell",
        "2",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        s(&report),
        "--threads",
        "2",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grand mean AUC"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 4);
    assert_eq!(json["config"]["master_seed"], 3);

    let report_csv = dir.path().join("report.csv");
    ok(&[
        "bench",
        "--features",
        s(&set),
        "--classes",
        "0",
        "--gamma-grid",
        "0.2",
        "--seeds-per-cell",
        "1",
        "--out",
        s(&report_csv),
    ]);
    let text = std::fs::read_to_string(&report_csv).unwrap();
    assert!(text.starts_with("row_type,inlier_class,gamma,rep,seed,"));

    let scored = ok(&["score", "--features", s(&set)]);
    let json: serde_json::Value = serde_json::from_slice(&scored.stdout).unwrap();
    assert_eq!(json["detector"], "multi-t");
    assert_eq!(json["scores"].as_array().unwrap().len(), 240);
    let (phi_in, phi_out) =
        (json["thresholds"]["phi_in"].as_f64().unwrap(), json["thresholds"]["phi_out"].as_f64().unwrap());
    assert!(phi_in <= phi_out);

    let csv_out = dir.path().join("scores.csv");
    ok(&[
        "score",
        "--features",
        s(&set),
        "--detector",
        "knn+multi-t",
        "--knn-k",
        "3",
        "--format",
        "csv",
        "--out",
        s(&csv_out),
    ]);
    let text = std::fs::read_to_string(&csv_out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,initial_score,score,predicted"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 240);
    assert!(rows.iter().all(|r| ["inlier", "outlier", "undecided"].iter().any(|l| r.ends_with(l))));
}

#[test]
fn convert_writes_feature_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab, out) = (dir.path().join("img"), dir.path().join("lab"), dir.path().join("out.csv"));
    multit::harness::write_idx(&img, &lab, &[0, 255, 51, 102, 255, 0, 0, 255], &[3, 8], 2, 2).unwrap();
    ok(&["convert", "--images", s(&img), "--labels", s(&lab), "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["class,f0,f1,f2,f3", "3,0,1,0.2,0.4", "8,1,0,0,1"]);
}

#[test]
fn bad_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = multit(&["score", "--features", s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = multit(&["score", "--features", s(&missing), "--detector", "lof"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown detector"));

    let out = multit(&["bench", "--out", s(&missing)]);
    assert!(!out.status.success());
}
