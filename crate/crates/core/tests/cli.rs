mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn infogain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infogain")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_scales_then_curves() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let curves = dir.path().join("curves.csv");
    let data = fixture("planted.json");
    let out = infogain(&["fit-scales", "--dataset", s(&data), "--tj", "16", "--quantile-interval", "0.125", "--out", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = infogain(&["curves", "--model", s(&model), "--out", s(&curves)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&curves).unwrap();
    let fitted: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let informative = fitted["uninformative_mask"].as_array().unwrap().iter().filter(|v| !v.as_bool().unwrap()).count();
    assert_eq!(text.lines().count() - 1, 14 * informative);
    // Seven quantiles between 0 and 1.
    assert_eq!(fitted["per_channel_scales"][0].as_array().unwrap().len(), 11);
}

#[test]
fn features_csv_has_header_and_one_row_per_graph() {
    let data = fixture("planted.json");
    let out = infogain(&["features", "--dataset", s(&data), "--scale-source", "dyadic", "--j", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("graph,label,"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn benchmark_is_byte_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    let body = serde_json::json!({
        "dataset": fixture("planted.json"),
        "scale_source": {"infogain": {"max_scale": 32}},
        "folds": 2,
        "seed": 7
    });
    std::fs::write(&config, body.to_string()).unwrap();
    let mut metrics = Vec::new();
    let mut models = Vec::new();
    for (k, workers) in ["1", "4"].iter().enumerate() {
        let out_path = dir.path().join(format!("metrics_{k}.json"));
        let models_dir = dir.path().join(format!("models_{k}"));
        let out = infogain(&[
            "benchmark",
            "--config",
            s(&config),
            "--out",
            s(&out_path),
            "--models-dir",
            s(&models_dir),
            "--workers",
            workers,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        metrics.push(std::fs::read(&out_path).unwrap());
        models.push(std::fs::read(models_dir.join("fold_0.json")).unwrap());
    }
    assert_eq!(metrics[0], metrics[1]);
    assert_eq!(models[0], models[1]);
}

#[test]
fn info_prints_statistics() {
    let out = infogain(&["info", "--dataset", s(&fixture("tiny"))]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Graphs         2"));
    assert!(text.contains("Node Features  2"));
}

#[test]
fn validation_errors_exit_with_two() {
    assert_eq!(infogain(&["fit-scales", "--bogus"]).status.code(), Some(2));
    assert_eq!(infogain(&["info", "--dataset", "/definitely/missing"]).status.code(), Some(2));
    let data = fixture("planted.json");
    let out = infogain(&["fit-scales", "--dataset", s(&data), "--tj", "2", "--out", "/tmp/never.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(infogain(&["--help"]).status.code(), Some(0));
}
