use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lgga(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgga"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn lgga")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn seeded_data(dir: &Path) {
    let out = lgga(&["gen-data", "--problem", "resistance", "--n", "25", "--seed", "4", "--out", "d.csv"], dir);
    assert!(out.status.success(), "{out:?}");
    fs::write(dir.join("t.txt"), "sz(r1, r2)\nout_le_min(r1, r2)\n").unwrap();
}

#[test]
fn gen_data_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = lgga(&["gen-data", "--problem", "gas", "--n", "5", "--seed", "9"], dir.path());
    let b = lgga(&["gen-data", "--problem", "gas", "--n", "5", "--seed", "9"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some("P,V,n,T,y"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn fit_writes_artifacts_and_prints_expression() {
    let dir = tempfile::tempdir().unwrap();
    seeded_data(dir.path());
    let args = ["fit", "--data", "d.csv", "--truths", "t.txt", "--generations", "5", "--seed", "2", "--out", "run"];
    let out = lgga(&args, dir.path());
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).lines().count(), 1);
    let run = dir.path().join("run");
    let reports = fs::read_to_string(run.join("reports.jsonl")).unwrap();
    assert!(!reports.is_empty() && reports.lines().count() <= 5);
    for line in reports.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["best_mse"].is_number());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["best_expression"].as_str().unwrap(), stdout(&out).trim());
    assert_eq!(summary["initial_size"], 25);
    assert!(fs::read_to_string(run.join("augmented.csv")).unwrap().starts_with("r1,r2,y,"));

    let again = lgga(&args, dir.path());
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn augment_streams_csv_and_can_strip_provenance() {
    let dir = tempfile::tempdir().unwrap();
    seeded_data(dir.path());
    let out = lgga(
        &["augment", "--data", "d.csv", "--truths", "t.txt", "--generations", "2", "--strip-provenance"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("r1,r2,y"));
    assert!(text.lines().count() > 26);
}

#[test]
fn equiv_reports_a_boolean() {
    let dir = tempfile::tempdir().unwrap();
    let same = lgga(&["equiv", "r1 * r2 / (r1 + r2)", "1 / (1 / r1 + 1 / r2)", "--vars", "r1,r2"], dir.path());
    assert_eq!(stdout(&same).trim(), "true");
    let differ = lgga(&["equiv", "r1", "r2", "--problem", "resistance"], dir.path());
    assert_eq!(stdout(&differ).trim(), "false");
}

#[test]
fn exit_codes_distinguish_input_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    seeded_data(dir.path());
    let missing = lgga(&["fit", "--data", "missing.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(missing.stdout.is_empty());

    fs::write(dir.path().join("bad.txt"), "sz(r1, nope)\n").unwrap();
    let bad_truth = lgga(&["fit", "--data", "d.csv", "--truths", "bad.txt"], dir.path());
    assert_eq!(bad_truth.status.code(), Some(1));

    let unknown = lgga(&["bench", "--problem", "nope"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("resistance"));

    let mode = lgga(&["fit", "--data", "d.csv", "--mode", "bogus"], dir.path());
    assert_eq!(mode.status.code(), Some(2));

    fs::write(dir.path().join("c.json"), r#"{"population_size": 0}"#).unwrap();
    let config = lgga(&["fit", "--data", "d.csv", "--config", "c.json"], dir.path());
    assert_eq!(config.status.code(), Some(2));
}

#[test]
fn bench_experiment_one_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgga(
        &[
            "bench", "--problem", "resistance", "--experiment", "1", "--seeds", "2", "--generations", "3",
            "--population", "30", "--initial-m", "10", "--out", "b",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["problem"], "Resistance");
    assert_eq!(v[0]["seeds"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("b/experiment1.json").exists());
}
