use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn clairvoyant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clairvoyant"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env("CLAIRVOYANT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = clairvoyant(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn gen(dir: &Path, name: &str, family: &str, count: &str, seed: &str) -> String {
    let out = dir.join(name);
    let out = out.to_str().unwrap().to_string();
    ok(&["gen", "--family", family, "--count", count, "--size", "16", "--seed", seed, "--out", &out]);
    out
}

const SMALL_SAIL: &str = r#"{"iterations": 2, "episodes": 4, "labels": 5, "regressor": {"epochs": 5}}"#;

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = clairvoyant(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = clairvoyant(&["gen", "--family", "forest", "--count", "1", "--out", "x", "--colour", "red"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", "gap-wall", "4", "1");
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"beta0": 1.5}"#).unwrap();
    let out = clairvoyant(&[
        "train",
        "sail",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        &data,
        "--out",
        dir.path().join("m.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta0"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", "gap-wall", "4", "1");
    let cfg = dir.path().join("typo.json");
    fs::write(&cfg, r#"{"iteratons": 3}"#).unwrap();
    let out = clairvoyant(&["train", "ql", "--config", cfg.to_str().unwrap(), "--data", &data, "--out", "unused.bin"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteratons"));
}

#[test]
fn bad_family_parameter_fails() {
    let out = clairvoyant(&["gen", "--family", "volcano", "--count", "1", "--out", "unused"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("family"));
}

#[test]
fn gen_writes_manifest_and_graymaps() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "gaps", "gap-wall", "3", "1");
    let manifest = fs::read_to_string(Path::new(&data).join("manifest.json")).unwrap();
    assert!(manifest.contains("\"gap-wall\""));
    for i in 0..3 {
        let pgm = fs::read(Path::new(&data).join(format!("world_{i:05}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n16 16\n255\n"));
    }
}

#[test]
fn seeded_pipeline_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, SMALL_SAIL).unwrap();
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let root = dir.path().join(run);
        let data = gen(&root, "gaps", "gap-wall", "10", "3");
        let models = root.join("models");
        ok(&[
            "train",
            "sail",
            "--config",
            cfg.to_str().unwrap(),
            "--data",
            &data,
            "--out",
            models.join("sail.bin").to_str().unwrap(),
        ]);
        let report = root.join("report.csv");
        ok(&[
            "eval",
            "--data",
            &data,
            "--methods",
            "sail,astar,greedy-euc,greedy-man,mha",
            "--model-dir",
            models.to_str().unwrap(),
            "--budget",
            "5000",
            "--out",
            report.to_str().unwrap(),
        ]);
        reports.push((
            fs::read(&report).unwrap(),
            fs::read(models.join("sail.bin")).unwrap(),
            fs::read_to_string(models.join("sail.bin.log.csv")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports[0].0.clone()).unwrap();
    let sail_row = text.lines().find(|l| l.starts_with("gaps,sail,")).unwrap();
    let hash = sail_row.split(',').nth(10).unwrap();
    assert_eq!(hash.len(), 16);
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn render_writes_one_frame_per_expansion_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "f", "forest", "2", "4");
    let runs = dir.path().join("runs.csv");
    ok(&[
        "eval",
        "--data",
        &data,
        "--methods",
        "greedy-euc",
        "--out",
        dir.path().join("r.csv").to_str().unwrap(),
        "--runs",
        runs.to_str().unwrap(),
    ]);
    let runs = fs::read_to_string(runs).unwrap();
    let second = runs.lines().nth(2).unwrap();
    let expansions: usize = second.split(',').nth(3).unwrap().parse().unwrap();
    let frames = dir.path().join("frames");
    ok(&["render", "--data", &data, "--index", "1", "--method", "greedy-euc", "--scale", "1", "--out", frames.to_str().unwrap()]);
    assert_eq!(fs::read_dir(&frames).unwrap().count(), expansions + 1);
    let first = fs::read(frames.join("frame_00000.ppm")).unwrap();
    assert!(first.starts_with(b"P6\n16 16\n255\n"));
}

#[test]
fn ledger_reports_rows_and_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "g", "gap-wall", "6", "5");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, SMALL_SAIL).unwrap();
    let model = dir.path().join("sl.bin");
    ok(&["train", "sl", "--config", cfg.to_str().unwrap(), "--data", &data, "--out", model.to_str().unwrap()]);
    let out = dir.path().join("ledger.csv");
    ok(&["ledger", "--data", &data, "--model", model.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "instance,a,b,a_squared_lt_b");
    assert_eq!(lines.len(), 6 + 2);
    assert!(lines[7].starts_with("fraction,,,"));
}

#[test]
fn ipp_train_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lines");
    ok(&[
        "gen",
        "--family",
        "parallel-lines",
        "--count",
        "6",
        "--size",
        "20",
        "--nodes",
        "20",
        "--seed",
        "2",
        "--out",
        data.to_str().unwrap(),
    ]);
    let cfg = dir.path().join("ipp.json");
    fs::write(&cfg, r#"{"horizon": 5, "iterations": 2, "episodes": 3, "regressor": {"kind": "tree-ensemble", "trees": 5}}"#).unwrap();
    let models = dir.path().join("models");
    ok(&[
        "train",
        "ipp",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        models.join("agg.bin").to_str().unwrap(),
    ]);
    let cem = dir.path().join("cem.json");
    fs::write(&cem, r#"{"domain": "ipp", "horizon": 5, "cem": {"iterations": 2, "batch": 6, "envs_per_param": 2}}"#).unwrap();
    ok(&[
        "train",
        "cem",
        "--config",
        cem.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        models.join("cem.bin").to_str().unwrap(),
    ]);
    let report = dir.path().join("r.csv");
    ok(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "agg,cem,avg-entropy,oracle-onestep",
        "--model-dir",
        models.to_str().unwrap(),
        "--horizon",
        "5",
        "--out",
        report.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(report).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.contains(",coverage,")));
}
