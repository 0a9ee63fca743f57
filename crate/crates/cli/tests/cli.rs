use std::path::Path;
use std::process::{Command, Output};

use readmit_cli::Summary;

const SMALL: &str = r#"
[synth]
n = 300

[embedding]
dim = 8
epochs = 1

[model]
filters = 6

[train]
max_epochs = 2
lr = 0.01

[explain]
limit = 5

[baseline.logistic]
epochs = 50

[baseline.ffnn]
max_epochs = 3
"#;

fn readmit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_readmit"))
        .arg("--config")
        .arg(dir.join("pipeline.toml"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stage(dir: &Path, args: &[&str]) -> Summary {
    let out = readmit(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    serde_json::from_str(stdout.lines().last().unwrap()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pipeline.toml"), SMALL).unwrap();
    dir
}

const STAGES: [&str; 9] =
    ["synth", "preprocess", "vocab", "embed", "train", "evaluate", "explain", "profile", "baseline"];

fn run_all(dir: &Path) -> Vec<Summary> {
    STAGES.iter().map(|s| stage(dir, &[s])).collect()
}

#[test]
fn pipeline_runs_end_to_end_and_reproducibly() {
    let a = setup();
    let b = setup();
    let first = run_all(a.path());
    let second = run_all(b.path());
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(x, y, "stage {} differs between runs", x.stage);
    }
    let eval = &first[5];
    let c = eval.metrics["c_statistic"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&c));
    assert_eq!(eval.inputs["model.bin"], first[4].outputs["model.bin"]);
    assert!(a.path().join("reports/explain/index.html").exists());
    assert_eq!(first[6].metrics["max_reconstruction_error"].as_f64(), Some(0.0));

    // a re-run in place rewrites identical bytes
    let again = stage(a.path(), &["train"]);
    assert_eq!(again.outputs, first[4].outputs);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = setup();
    let d = dir.path();

    let out = readmit(d, &["train"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prepared corpus"));

    assert_eq!(readmit(d, &["--set", "train.max_epochs", "train"]).status.code(), Some(2));
    assert_eq!(readmit(d, &["--set", "train.nonsense=1", "train"]).status.code(), Some(2));
    assert_eq!(readmit(d, &["frobnicate"]).status.code(), Some(2));

    for s in ["synth", "preprocess", "vocab", "embed"] {
        stage(d, &[s]);
    }
    let out = readmit(d, &["--set", "train.lr=1e300", "train"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    let out = readmit(d, &["--set", "expect.\"vocab.jsonl\"=00", "train"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sha256"));

    stage(d, &["train"]);
    let model = d.join("model.bin");
    let mut bytes = std::fs::read(&model).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    std::fs::write(&model, bytes).unwrap();
    assert_eq!(readmit(d, &["evaluate"]).status.code(), Some(3));
}

#[test]
fn model_with_other_length_is_refused() {
    let dir = setup();
    let d = dir.path();
    for s in STAGES[..5].iter() {
        stage(d, &[s]);
    }
    let short = ["--set", "preprocess.length=120", "--set", "paths.prepared=prepared120.jsonl"];
    stage(d, &[&short[..], &["preprocess"]].concat());
    let out = readmit(d, &[&short[..], &["explain"]].concat());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("L = 700") && err.contains("L = 120"), "{err}");
    assert!(!d.join("reports/explain").exists());

    // the prepared corpus carries its length too
    let out = readmit(d, &["--set", "preprocess.length=120", "vocab"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_command_prints_effective_settings() {
    let dir = setup();
    let out = readmit(dir.path(), &["--set", "model.filters=7", "config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("filters = 7"));
}
