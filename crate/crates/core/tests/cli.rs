#![allow(clippy::needless_range_loop)]

use std::path::Path;
use std::process::{Command, Output};

use gnss_qsvm::dataio::{load_csv, Label};
use gnss_qsvm::experiment::{ModelDocument, CONFUSION_FILE, GRID_FILE, MODEL_FILE, REPORT_FILE};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnss-qsvm"))
        .args(args)
        .current_dir(dir)
        .env_remove("GNSS_QSVM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn synth_train_predict_eval_boundary_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(
        &[
            "synth",
            "--preset",
            "T0",
            "--seed",
            "1",
            "--out",
            "train.csv",
        ],
        dir,
    );
    ok(
        &[
            "synth", "--preset", "T1_SHAPE", "--seed", "2", "--out", "test.csv",
        ],
        dir,
    );
    let train = load_csv(&dir.join("train.csv")).unwrap();
    assert_eq!(train.len(), 152);

    ok(
        &["train", "--train", "train.csv", "--out", "model.json"],
        dir,
    );
    let doc = ModelDocument::load(&dir.join("model.json")).unwrap();
    assert_eq!(doc.model.classes, Label::ALL.to_vec());

    ok(
        &[
            "predict",
            "--model",
            "model.json",
            "--input",
            "test.csv",
            "--out",
            "pred.csv",
        ],
        dir,
    );
    let pred = load_csv(&dir.join("pred.csv")).unwrap();
    let test = load_csv(&dir.join("test.csv")).unwrap();
    assert_eq!(pred.len(), test.len());
    assert_eq!(pred.features(), test.features());

    let summary = ok(
        &[
            "eval",
            "--model",
            "model.json",
            "--test",
            "test.csv",
            "--out-dir",
            "ev",
        ],
        dir,
    );
    assert!(summary.contains("accuracy 0.9024"), "{summary}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("ev").join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report["n_total"], 41);
    let confusion = std::fs::read_to_string(dir.join("ev").join(CONFUSION_FILE)).unwrap();
    assert_eq!(confusion.lines().count(), 4);

    ok(
        &[
            "boundary",
            "--model",
            "model.json",
            "--resolution",
            "20",
            "--out",
            "grid.csv",
        ],
        dir,
    );
    let grid = std::fs::read_to_string(dir.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("x,y,label"));
    assert_eq!(grid.lines().count(), 1 + 400);
}

#[test]
fn train_accepts_synthetic_sources_and_rbf() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &[
            "train",
            "--train",
            "synth:T0:1",
            "--train",
            "synth:T1:2",
            "--model",
            "svm",
            "--out",
            "m.json",
        ],
        tmp.path(),
    );
    let doc = ModelDocument::load(&tmp.path().join("m.json")).unwrap();
    assert_eq!(doc.model.training_features.len(), 193);
}

#[test]
fn kernel_export_is_symmetric_csv() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["kernel", "--input", "synth:T1:2", "--out", "k.csv"],
        tmp.path(),
    );
    let text = std::fs::read_to_string(tmp.path().join("k.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41);
    for i in 0..41 {
        assert_eq!(rows[i].len(), 41);
        assert_eq!(rows[i][i], 1.0);
        for j in 0..41 {
            assert_eq!(rows[i][j], rows[j][i]);
        }
    }
}

#[test]
fn experiment_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = ok(
        &[
            "experiment",
            "--train",
            "synth:T0:1",
            "--test",
            "synth:T1:2",
            "--grid",
            "10",
            "--out-dir",
            "run",
        ],
        tmp.path(),
    );
    assert!(summary.starts_with("accuracy 0.9024"), "{summary}");
    let run = tmp.path().join("run");
    for f in [REPORT_FILE, CONFUSION_FILE, MODEL_FILE, GRID_FILE] {
        assert!(run.join(f).is_file(), "{f}");
    }
    ModelDocument::load(&run.join(MODEL_FILE)).unwrap();
}

#[test]
fn out_dir_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gnss-qsvm"))
        .args([
            "experiment",
            "--train",
            "synth:T1:2",
            "--test",
            "synth:T1:3",
            "--model",
            "svm",
        ])
        .current_dir(tmp.path())
        .env("GNSS_QSVM_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("from-env").join(REPORT_FILE).is_file());
}

#[test]
fn missing_test_file_fails_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "experiment",
            "--train",
            "synth:T0:1",
            "--test",
            "nope.csv",
            "--out-dir",
            "run",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn malformed_csv_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.csv"),
        "cn0_diff,elevation_deg,label\n1.0,40.0,LOS\n2.0,abc,NLOS\n",
    )
    .unwrap();
    let out = run(
        &["train", "--train", "bad.csv", "--out", "m.json"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));
    assert!(!tmp.path().join("m.json").exists());
}

#[test]
fn phases_are_independent_invocations() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let phase1 = [
        "experiment",
        "--train",
        "synth:T0:1",
        "--test",
        "synth:T1:2",
        "--out-dir",
        "p1",
    ];
    let phase2 = [
        "experiment",
        "--train",
        "synth:T0:1",
        "--train",
        "synth:T1:2",
        "--test",
        "synth:T2:3",
        "--out-dir",
        "p2",
    ];
    ok(&phase1, dir);
    ok(&phase2, dir);
    let p1_first = std::fs::read(dir.join("p1").join(REPORT_FILE)).unwrap();
    let p2_first = std::fs::read(dir.join("p2").join(REPORT_FILE)).unwrap();
    // reverse order into fresh directories
    let phase2b: Vec<&str> = phase2
        .iter()
        .map(|a| if *a == "p2" { "p2b" } else { a })
        .collect();
    let phase1b: Vec<&str> = phase1
        .iter()
        .map(|a| if *a == "p1" { "p1b" } else { a })
        .collect();
    ok(&phase2b, dir);
    ok(&phase1b, dir);
    assert_eq!(
        p1_first,
        std::fs::read(dir.join("p1b").join(REPORT_FILE)).unwrap()
    );
    assert_eq!(
        p2_first,
        std::fs::read(dir.join("p2b").join(REPORT_FILE)).unwrap()
    );
}

#[test]
fn raw_model_has_no_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["train", "--train", "synth:T1:2", "--raw", "--out", "m.json"],
        tmp.path(),
    );
    let out = run(
        &["boundary", "--model", "m.json", "--out", "g.csv"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(!tmp.path().join("g.csv").exists());
}

#[test]
fn rejects_bad_arguments() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["synth", "--preset", "T9", "--out", "x.csv"],
        vec![
            "train",
            "--train",
            "synth:T1:2",
            "--kernel",
            "bogus",
            "--out",
            "m.json",
        ],
        vec![
            "train",
            "--train",
            "synth:T1:2",
            "--c",
            "-1",
            "--out",
            "m.json",
        ],
        vec![
            "train",
            "--train",
            "synth:T1:2",
            "--kernel",
            "sampled",
            "--shots",
            "0",
            "--out",
            "m.json",
        ],
    ] {
        assert!(!run(&args, tmp.path()).status.success(), "{args:?}");
    }
    assert!(std::fs::read_dir(tmp.path()).unwrap().next().is_none());
}
