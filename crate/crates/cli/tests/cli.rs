use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensorscene")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulated(seed: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["simulate", "--seed", seed, "--out", "data.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("data.csv");
    (dir, path)
}

fn files(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect()
}

#[test]
fn simulate_writes_150_distinct_experiments_and_manifest() {
    let (dir, data) = simulated("7");
    let text = fs::read_to_string(&data).unwrap();
    let ids: BTreeSet<&str> =
        text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids.len(), 150);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("data.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_config_key_exits_2_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.sim"), "walker_speed = 90\nwalker_sped = 3\n").unwrap();
    let before = files(dir.path());
    let o = run(dir.path(), &["simulate", "--seed", "1", "--config", "bad.sim", "--out", "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("walker_sped"));
    assert_eq!(files(dir.path()), before);
}

#[test]
fn malformed_config_line_exits_2_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.sim"), "this is not a pair\n").unwrap();
    let o = run(dir.path(), &["simulate", "--seed", "1", "--config", "bad.sim", "--out", "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out.csv").exists());
    assert!(!dir.path().join("out.manifest.json").exists());
}

#[test]
fn invalid_classifier_lists_valid_kinds() {
    let (dir, _) = simulated("1");
    let o = run(dir.path(), &["crossval", "--data", "data.csv", "--classifier", "svm", "--seed", "1", "--out", "r.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for k in ["forest", "samme", "logreg", "trivial", "random"] {
        assert!(err.contains(k), "{err}");
    }
    assert!(!dir.path().join("r.csv").exists());
}

#[test]
fn empty_grid_exits_2() {
    let (dir, _) = simulated("1");
    let o = run(dir.path(), &["sweep", "--data", "data.csv", "--classifier", "forest", "--grid", "", "--seed", "1", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn importance_of_null_models_exits_2() {
    let (dir, _) = simulated("1");
    for kind in ["trivial", "random"] {
        let o = run(dir.path(), &["importance", "--data", "data.csv", "--classifier", kind, "--seed", "1", "--out", "i.csv"]);
        assert_eq!(o.status.code(), Some(2), "{kind}");
        assert!(stderr(&o).contains(kind));
    }
    assert!(!dir.path().join("i.csv").exists());
}

#[test]
fn override_for_another_classifier_exits_2() {
    let (dir, _) = simulated("1");
    let o = run(
        dir.path(),
        &["crossval", "--data", "data.csv", "--classifier", "logreg", "--n-trees", "5", "--seed", "1", "--out", "r.csv"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n-trees"));
}

#[test]
fn missing_data_file_exits_1() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["crossval", "--data", "nope.csv", "--classifier", "trivial", "--seed", "1", "--out", "r.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trivial_crossval_reports_two_thirds() {
    let (dir, _) = simulated("3");
    let o = run(dir.path(), &["crossval", "--data", "data.csv", "--classifier", "trivial", "--seed", "5", "--out", "r.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let row = report.lines().nth(1).unwrap();
    assert!(row.starts_with("trivial,") && row.ends_with(",0.667 ± 0.000"), "{row}");
    let folds = fs::read_to_string(dir.path().join("r.folds.csv")).unwrap();
    assert_eq!(folds.lines().count(), 151);
    let two = run(
        dir.path(),
        &["crossval", "--data", "data.csv", "--classifier", "trivial", "--mode", "2class", "--seed", "5", "--out", "r2.csv"],
    );
    assert!(two.status.success());
    let row = fs::read_to_string(dir.path().join("r2.csv")).unwrap().lines().nth(1).unwrap().to_string();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[4], "0.500 ± 0.000");
    assert_eq!(cells[6], "---");
}

fn outputs_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = files(dir)
        .into_iter()
        .filter(|f| !f.ends_with(".manifest.json"))
        .map(|f| {
            let bytes = fs::read(dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect();
    v.sort();
    v
}

fn strip_timestamp(manifest: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(manifest).unwrap();
    v.as_object_mut().unwrap().remove("timestamp_unix");
    v
}

#[test]
fn reruns_are_byte_identical() {
    let runs: Vec<TempDir> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let p = dir.path();
            assert!(run(p, &["simulate", "--seed", "11", "--out", "data.csv"]).status.success());
            let o = run(
                p,
                &["crossval", "--data", "data.csv", "--classifier", "forest", "--n-trees", "10", "--seed", "3", "--out", "cv.csv"],
            );
            assert!(o.status.success(), "{}", stderr(&o));
            dir
        })
        .collect();
    assert_eq!(outputs_of(runs[0].path()), outputs_of(runs[1].path()));
    for m in ["data.manifest.json", "cv.manifest.json"] {
        let a = fs::read_to_string(runs[0].path().join(m)).unwrap();
        let b = fs::read_to_string(runs[1].path().join(m)).unwrap();
        assert_eq!(strip_timestamp(&a), strip_timestamp(&b), "{m}");
    }
}

#[test]
fn sweep_writes_table_and_plot() {
    let (dir, _) = simulated("2");
    let o = run(
        dir.path(),
        &[
            "sweep", "--data", "data.csv", "--classifier", "samme", "--grid", "depth=1,2;rounds=1,5", "--folds", "5", "--seed", "1",
            "--out", "s.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "depth,rounds,obs_error,obs_error_hw,exp_error,exp_error_hw");
    assert_eq!(lines.count(), 4);
    let svg = fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    assert!(dir.path().join("s.manifest.json").exists());
}

#[test]
fn importance_writes_table_and_chart() {
    let (dir, _) = simulated("2");
    let o = run(
        dir.path(),
        &["importance", "--data", "data.csv", "--classifier", "forest", "--n-trees", "10", "--folds", "5", "--seed", "1", "--out", "i.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("i.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16);
    let total: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
    assert!(fs::read_to_string(dir.path().join("i.svg")).unwrap().contains("<rect"));
}

#[test]
fn missing_seed_exits_2() {
    let (dir, _) = simulated("1");
    for cmd in ["crossval", "sweep", "importance"] {
        let o = run(dir.path(), &[cmd, "--data", "data.csv", "--classifier", "forest", "--out", "x.csv"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(stderr(&o).contains("--seed"), "{cmd}");
    }
    assert!(!dir.path().join("x.csv").exists());
}
