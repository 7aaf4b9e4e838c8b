use std::path::Path;
use std::process::Command;

fn vistac(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vistac"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("run vistac")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p.display().to_string()
}

#[test]
fn report_without_artifacts_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = vistac(&["report"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{ \"seed\": \"not a number\" }");
    let o = vistac(&["--config", &cfg, "explore-tpe"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), "{ \"tpe\": { \"steps\": [0.0] } }");
    let o = vistac(&["--config", &cfg, "explore-tpe"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = vistac(&["run-episodes", "--experiment", "E9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_checkpoint_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = vistac(&["eval-detect", "--checkpoint", "/nonexistent/detector"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = vistac(&["run-episodes", "--experiment", "E5", "--checkpoint", "/nonexistent/detector"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tpe_report_and_threshold_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "tpe": { "placements": 6 } }"#);
    let o = vistac(&["--config", &cfg, "--seed", "3", "explore-tpe"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("reports/E7.json").exists());
    assert!(dir.path().join("reports/E7.csv").exists());
    // coarse pitch first: success cannot be non-increasing in listed order
    let bad = write_config(dir.path(), r#"{ "tpe": { "placements": 6, "steps": [150.0, 50.0] } }"#);
    let o = vistac(&["--config", &bad, "report", "--run", "E7", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn dataset_train_and_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "detection": { "image_size": 32, "model": { "enc1": 4, "enc2": 8, "dec2": 4, "blocks": 1 },
             "train": { "optimizer": { "kind": "sgd", "lr": 0.1, "momentum": 0.9, "weight_decay": 0.0 }, "batch_size": 4, "epochs": 1, "seed": 0 } } }"#,
    );
    let o = vistac(&["--config", &cfg, "gen-dataset", "--split", "train", "--count", "8"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = vistac(&["--config", &cfg, "gen-dataset", "--split", "unseen-backgrounds", "--count", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let train = dir.path().join("datasets/train").display().to_string();
    let o = vistac(&["--config", &cfg, "train", "--dataset", &train], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("models/detector.json").exists());
    let test = dir.path().join("datasets/unseen_backgrounds").display().to_string();
    let o = vistac(&["--config", &cfg, "--dump-heatmaps", "eval-detect", "--dataset", &test], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("accuracy="));
    assert_eq!(std::fs::read_dir(dir.path().join("heatmaps")).unwrap().count(), 4);
}
