use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use posterfuse::curation::QueryPlan;
use posterfuse::net::load_checkpoint;
use posterfuse::vocab::Vocabulary;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posterfuse")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

struct Pool {
    dir: tempfile::TempDir,
}

impl Pool {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pool");
        ok(&["synth", "--out-dir", p.to_str().unwrap(), "--setup", "1", "--scale", "0.02", "--appearance-dim", "16", "--seed", "2"]);
        Pool { dir }
    }

    fn path(&self, rel: &str) -> String {
        self.dir.path().join(rel).to_str().unwrap().to_string()
    }
}

#[test]
fn build_vocab_then_train_then_predict() {
    let pool = Pool::new();
    let manifest = pool.path("pool/manifest.jsonl");
    let vocab = pool.path("vocab.tsv");
    let summary = ok(&["build-vocab", "--manifest", &manifest, "--top-n", "20", "--out", &vocab]);
    assert!(summary.starts_with("260 documents"));
    assert_eq!(Vocabulary::load(&vocab).unwrap().len(), 20);

    let model = pool.path("m.bin");
    ok(&[
        "train", "--manifest", &manifest, "--vocab", &vocab, "--mode", "fused", "--depth", "3", "--hidden", "8,4",
        "--epochs", "5", "--out-model", &model,
    ]);
    let m = load_checkpoint(&model).unwrap();
    assert_eq!(m.dims(), vec![36, 8, 4, 1]);

    let history: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(format!("{model}.history.json")).unwrap()).unwrap();
    assert_eq!(history["epoch_losses"].as_array().unwrap().len(), 5);
    assert_eq!(history["train"]["epochs"], 5);
    assert_eq!(history["fusion"]["k"], 0.5);
    assert_eq!(history["mode"], "fused");

    let predictions = ok(&["predict", "--model", &model, "--manifest", &manifest, "--vocab", &vocab]);
    let lines: Vec<&str> = predictions.lines().collect();
    assert_eq!(lines.len(), 260);
    let cols: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(cols.len(), 3);
    let p: f64 = cols[1].parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(cols[2], if p >= 0.5 { "1" } else { "0" });
}

#[test]
fn train_rejects_mismatched_vocab_on_predict() {
    let pool = Pool::new();
    let manifest = pool.path("pool/manifest.jsonl");
    let (v20, v10) = (pool.path("v20.tsv"), pool.path("v10.tsv"));
    ok(&["build-vocab", "--manifest", &manifest, "--top-n", "20", "--out", &v20]);
    ok(&["build-vocab", "--manifest", &manifest, "--top-n", "10", "--out", &v10]);
    let model = pool.path("t.bin");
    ok(&["train", "--manifest", &manifest, "--vocab", &v20, "--mode", "text", "--depth", "1", "--epochs", "2", "--out-model", &model]);
    let err = fails(&["predict", "--model", &model, "--manifest", &manifest, "--vocab", &v10, "--mode", "text"]);
    assert!(err.contains("expected 20"), "{err}");
}

#[test]
fn missing_annotation_names_the_sample() {
    let pool = Pool::new();
    let manifest = pool.path("pool/manifest.jsonl");
    let first = std::fs::read_to_string(&manifest).unwrap();
    let id = serde_json::from_str::<serde_json::Value>(first.lines().next().unwrap()).unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    std::fs::remove_file(pool.path(&format!("pool/annotations/{id}.json"))).unwrap();
    let err = fails(&["build-vocab", "--manifest", &manifest, "--out", &pool.path("v.tsv")]);
    assert!(err.contains(&id), "{err}");
    assert!(!Path::new(&pool.path("v.tsv")).exists());
}

#[test]
fn eval_writes_report_and_table() {
    let pool = Pool::new();
    let report = pool.path("r.json");
    let table = ok(&[
        "eval", "--pool-manifest", &pool.path("pool/manifest.jsonl"), "--setup", "1", "--scale", "0.01", "--models",
        "D,RT", "--kfold", "3", "--epochs", "3", "--report", &report,
    ]);
    assert!(table.lines().next().unwrap().contains("Political"));
    assert!(table.lines().nth(2).unwrap().contains(" 85 "), "{table}");
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["samples"], 130);
    assert_eq!(r["positives"], 30);
    assert_eq!(r["folds"].as_array().unwrap().len(), 3);
    assert_eq!(r["models"][0]["name"], "D");
    assert_eq!(r["models"][1]["name"], "RT");
    assert_eq!(r["config"]["train"]["epochs"], 3);
}

#[test]
fn eval_errors() {
    let pool = Pool::new();
    let m = pool.path("pool/manifest.jsonl");
    let r = pool.path("r.json");
    let err = fails(&["eval", "--pool-manifest", &m, "--setup", "1", "--report", &r]);
    assert!(err.contains("short by"), "{err}");
    let err = fails(&["eval", "--pool-manifest", &m, "--setup", "9", "--report", &r]);
    assert!(err.contains("1-5"), "{err}");
    let err = fails(&["eval", "--pool-manifest", &m, "--setup", "custom", "--report", &r]);
    assert!(err.contains("--counts"), "{err}");
    let err = fails(&["eval", "--pool-manifest", &m, "--setup", "custom", "--counts", "Posters=3", "--report", &r]);
    assert!(err.contains("Posters"), "{err}");
    assert!(!Path::new(&r).exists());
}

#[test]
fn plan_from_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.csv");
    let kw = fixtures().join("keywords");
    let summary = ok(&[
        "plan", "--keywords-dir", kw.to_str().unwrap(), "--quotas", fixtures().join("quotas.csv").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    let plan = QueryPlan::import(&out).unwrap();
    // 8 ideology keywords x 4 suffixes + 2 "paid for by" keywords x 3 suffixes
    assert_eq!(plan.len(), 8 * 4 + 2 * 3);
    assert_eq!(plan.total_quota(), 8 * 105 + 2 * 65);
    assert!(summary.contains("38 queries"), "{summary}");
    assert!(plan.entries.iter().all(|e| e.quota > 0));
    assert!(plan.entries.iter().any(|e| e.category == "Parties Ideologies"));
}

#[test]
fn plan_default_quotas_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.csv");
    let kw = fixtures().join("keywords");
    ok(&["plan", "--keywords-dir", kw.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(QueryPlan::import(&out).unwrap().len(), 10 * 4);

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let summary = ok(&["plan", "--keywords-dir", empty.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(summary.contains("0 queries"));
    assert!(QueryPlan::import(&out).unwrap().is_empty());

    let err = fails(&[
        "plan", "--keywords-dir", kw.to_str().unwrap(), "--quotas", fixtures().join("quotas_bad.csv").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(err.contains("quotas_bad.csv:2"), "{err}");
}

#[test]
fn unknown_subcommand_and_bad_flag_values() {
    assert_ne!(run(&["frobnicate"]).status.code(), Some(0));
    let out = run(&["train", "--manifest", "m", "--vocab", "v", "--mode", "pixels", "--out-model", "x"]);
    assert!(!out.status.success());
}
