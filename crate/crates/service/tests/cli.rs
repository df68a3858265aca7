mod support;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sciprose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sciprose")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = sciprose(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_lines(path: &Path, lines: &[String]) {
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn corrupt_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    write_lines(&input, &support::sentences(200, 3, true));
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let ops = dir.path().join(format!("{name}.ops"));
        ok(&["corrupt", "--seed", seed, "--input", p(&input), "--rate", "0.3", "--out", p(&out), "--ops", p(&ops)]);
        (std::fs::read(out).unwrap(), std::fs::read(ops).unwrap())
    };
    let a = run("a.jsonl", "5");
    let b = run("b.jsonl", "5");
    let c = run("c.jsonl", "6");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn score_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (sci, col) = (dir.path().join("sci.txt"), dir.path().join("col.txt"));
    write_lines(&sci, &support::sentences(300, 1, true));
    write_lines(&col, &support::sentences(300, 2, false));
    let model = dir.path().join("score.bin");
    let summary = ok(&[
        "train-score", "--seed", "1", "--scientific", p(&sci), "--nonscientific", p(&col), "--out", p(&model),
        "--epochs", "4", "--hidden", "32",
    ]);
    assert!(summary["test"]["mse"].as_f64().unwrap() < 0.05, "{summary}");

    let probe = dir.path().join("probe.txt");
    write_lines(&probe, &support::sentences(20, 77, false));
    let scores = dir.path().join("scores.jsonl");
    let summary = ok(&["score", "--model", p(&model), "--input", p(&probe), "--inject-tokens", "--out", p(&scores)]);
    assert_eq!(std::fs::read_to_string(&scores).unwrap().lines().count(), 20);
    assert!(summary.is_object(), "{summary}");
}

#[test]
fn corrupt_then_evaluate_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let sentences = support::sentences(100, 9, true);
    write_lines(&input, &sentences);
    let pairs = dir.path().join("pairs.jsonl");
    ok(&["corrupt", "--input", p(&input), "--rate", "0.2", "--out", p(&pairs)]);
    let originals: Vec<String> = std::fs::read_to_string(&pairs)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["original"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(originals, sentences);
    let outputs = dir.path().join("outputs.txt");
    write_lines(&outputs, &originals);
    let report = dir.path().join("report.json");
    ok(&["bucket-report", "--pairs", p(&pairs), "--outputs", p(&outputs), "--report", p(&report)]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["system"] == "model" && r["metric"] == "bleu"));
    for r in rows.iter().filter(|r| r["system"] == "model" && r["metric"] == "wer") {
        assert_eq!(r["value"], 0.0);
    }
}

#[test]
fn section_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let lines: Vec<String> =
        support::section_corpus(20, 5, 4).iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    write_lines(&records, &lines);
    let split_dir = dir.path().join("splits");
    ok(&["split", "--records", p(&records), "--out-dir", p(&split_dir)]);
    let train = split_dir.join("train.jsonl");
    assert!(train.exists());
    let model = dir.path().join("sections.bin");
    let summary = ok(&[
        "train-sections", "--records", p(&records), "--context", "3", "--out", p(&model), "--epochs", "20", "--hidden", "32",
    ]);
    assert!(summary.to_string().contains("f1"), "{summary}");
    let input = dir.path().join("doc.txt");
    write_lines(&input, &["We propose a method.".to_string(), "Results improve.".to_string()]);
    let out = dir.path().join("labels.jsonl");
    ok(&["classify", "--model", p(&model), "--input", p(&input), "--context", "3", "--out", p(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}

#[test]
fn serve_with_missing_config_fails_naming_the_path() {
    let out = sciprose(&["serve", "--config", "/nonexistent/sciprose.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/sciprose.toml"));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = sciprose(&["ingest", "--no-such-flag"]);
    assert!(!out.status.success());
    let out = sciprose(&["corrupt", "--input", "x", "--rate", "abc", "--out", "y"]);
    assert!(!out.status.success());
}

#[test]
fn corrupt_rejects_bad_rate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    write_lines(&input, &support::sentences(5, 3, true));
    let out = sciprose(&["corrupt", "--input", p(&input), "--rate", "-0.5", "--out", p(&dir.path().join("o"))]);
    assert!(!out.status.success());
}
