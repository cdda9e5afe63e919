mod common;

use std::path::Path;
use std::process::{Command, Output};

fn gridfault(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridfault")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_tiny(dir: &Path) -> String {
    let cfg = common::tiny_config(&dir.join("run"));
    let path = dir.join("tiny.json");
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_lists_subcommands() {
    let o = gridfault(&["--help"]);
    assert!(o.status.success());
    for sub in ["generate", "train", "transfer", "evaluate", "sweep"] {
        assert!(stdout(&o).contains(sub), "{sub}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(gridfault(&["generate", "--config", "nowhere-desk", "--out", out]).status.code(), Some(2));
    assert_eq!(gridfault(&["train", "--arch", "mlp", "--out", out]).status.code(), Some(2));
    assert_eq!(gridfault(&["generate", "--measured", "1,99", "--out", out]).status.code(), Some(2));
    assert_eq!(gridfault(&["sweep", "--sweep", "volume=3", "--out", out]).status.code(), Some(2));
    assert_eq!(gridfault(&["bogus"]).status.code(), Some(2));
}

#[test]
fn missing_artifacts_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let o = gridfault(&["train", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("train dataset"));
}

#[test]
fn generate_train_evaluate_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let run = dir.path().join("run");

    let o = gridfault(&["generate", "--config", &cfg, "--measured", "1,5,9", "--snr", "30"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"snr_db\": 30.0"));
    assert!(stdout(&o).contains("train: 278 samples (230 fault, 48 non-fault)"));

    let o = gridfault(&["train", "--config", &cfg, "--task", "type", "--epochs", "2", "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run.join("model_type_rgcn.gfck").exists());
    assert!(run.join("history_type_rgcn.csv").exists());

    let o = gridfault(&["evaluate", "--config", &cfg, "--task", "type"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rgcn type: accuracy"));
    assert!(run.join("report_potsdam_type_rgcn.json").exists());
}
