use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn vus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vus"))
        .args(args)
        .env_remove("VUS_THREADS")
        .output()
        .expect("run vus")
}

fn eval_fixture(score: &str, extra: &[&str]) -> Value {
    let series = fixture("series.csv");
    let score = fixture(&format!("{score}.txt"));
    let mut args = vec![
        "eval",
        "--series",
        series.to_str().unwrap(),
        "--score",
        score.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = vus(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn golden_outputs_match() {
    for name in ["perfect", "inverted", "lagged"] {
        let expected: Value = serde_json::from_str(
            &std::fs::read_to_string(fixture(&format!("{name}.expected.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(without_timing(eval_fixture(name, &[])), expected, "{name}");
    }
}

#[test]
fn perfect_score_scores_one_everywhere() {
    let v = eval_fixture("perfect", &[]);
    for (name, value) in v["measures"].as_object().unwrap() {
        assert_eq!(value.as_f64(), Some(1.0), "{name}");
    }
}

#[test]
fn inverted_score_has_zero_auc_roc() {
    let v = eval_fixture("inverted", &[]);
    assert_eq!(v["measures"]["auc_roc"].as_f64(), Some(0.0));
    assert_eq!(v["measures"]["f"].as_f64(), Some(0.0));
}

#[test]
fn implementations_give_identical_bytes() {
    let runs: Vec<String> = ["naive", "opt", "opt-mem"]
        .iter()
        .map(|i| without_timing(eval_fixture("lagged", &["--impl", i])).to_string())
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn repeated_runs_are_identical() {
    let a = without_timing(eval_fixture("lagged", &[])).to_string();
    let b = without_timing(eval_fixture("lagged", &[])).to_string();
    assert_eq!(a, b);
}

#[test]
fn csv_output_lists_requested_measures() {
    let series = fixture("series.csv");
    let score = fixture("perfect.txt");
    let out = vus(&[
        "eval",
        "--series",
        series.to_str().unwrap(),
        "--score",
        score.to_str().unwrap(),
        "--measures",
        "vus_roc,f",
        "--out",
        "csv",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "series_id,measure,value\nseries,f,1\nseries,vus_roc,1\n"
    );
}

fn assert_error(out: &Output, code: i32, kind: &str) {
    assert_eq!(out.status.code(), Some(code));
    let err = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error[{kind}]: ")), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_error(&vus(&["eval"]), 2, "usage");
    let series = fixture("series.csv");
    let score = fixture("perfect.txt");
    let out = vus(&[
        "eval",
        "--series",
        series.to_str().unwrap(),
        "--score",
        score.to_str().unwrap(),
        "--measures",
        "nonsense",
    ]);
    assert_error(&out, 2, "usage");
}

#[test]
fn data_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0,0\n2.0,7\n").unwrap();
    let score = fixture("perfect.txt");
    let out = vus(&[
        "eval",
        "--series",
        bad.to_str().unwrap(),
        "--score",
        score.to_str().unwrap(),
    ]);
    assert_error(&out, 3, "data");
}

#[test]
fn missing_files_exit_five() {
    let score = fixture("perfect.txt");
    let out = vus(&[
        "eval",
        "--series",
        "/nonexistent/x.csv",
        "--score",
        score.to_str().unwrap(),
    ]);
    assert_error(&out, 5, "io");
}

#[test]
fn help_exits_zero() {
    assert!(vus(&["--help"]).status.success());
}

#[test]
fn synth_then_eval_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let score = dir.path().join("s.txt");
    let out = vus(&[
        "synth",
        "--length",
        "1000",
        "--seed",
        "3",
        "--out",
        series.to_str().unwrap(),
        "--score-out",
        score.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let meta: Value = serde_json::from_slice(&out.stdout).unwrap();
    let out = vus(&[
        "eval",
        "--series",
        series.to_str().unwrap(),
        "--score",
        score.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 1000);
    assert_eq!(v["anomaly_count"], meta["anomaly_count"]);
}

#[test]
fn thread_count_does_not_change_robustness() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores");
    std::fs::create_dir(&scores).unwrap();
    for name in ["perfect", "lagged"] {
        std::fs::copy(
            fixture(&format!("{name}.txt")),
            scores.join(format!("{name}.txt")),
        )
        .unwrap();
    }
    let series = fixture("series.csv");
    let args = [
        "robustness",
        "--series",
        series.to_str().unwrap(),
        "--scores",
        scores.to_str().unwrap(),
        "--measures",
        "vus_roc,rf",
        "--seed",
        "9",
    ];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_vus"))
            .args(args)
            .env("VUS_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(
        one.status.success(),
        "{}",
        String::from_utf8_lossy(&one.stderr)
    );
    assert_eq!(one.stdout, four.stdout);
    assert_error(&run("zero"), 2, "usage");
}
