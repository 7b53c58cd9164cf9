use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn elwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn dumped_preset_is_a_valid_config() {
    let out = elwave(&["--dump-preset", "smoke"]);
    assert!(out.status.success());
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("smoke.toml");
    std::fs::write(&cfg, &out.stdout).unwrap();
    let dir = tmp.path().join("out");
    let run = elwave(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "eigen-check"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("PASS eigenstructure"), "{stdout}");
}

#[test]
fn invalid_config_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[data]\nalpha = 0.7\n").unwrap();
    let dir = tmp.path().join("out");
    let run = elwave(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "make-data"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("data.alpha"));
    assert!(!dir.exists());
}

#[test]
fn unknown_preset_and_missing_subcommand_are_usage_errors() {
    assert_eq!(elwave(&["--preset", "nope", "make-data"]).status.code(), Some(2));
    assert_eq!(elwave(&[]).status.code(), Some(2));
}

#[test]
fn make_data_writes_the_initial_state() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    let run = elwave(&["--preset", "smoke", "--out", dir.to_str().unwrap(), "make-data"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(dir.join("data/phi0.csv")).unwrap();
    assert!(csv.starts_with("# schema=elwave.data.v1\nx,w1,w2,w3,w4,phi1,phi2,phi3,phi4\n"));
    let m = manifest(&dir);
    let paths: Vec<&str> = m["files"].as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert!(paths.contains(&"data/phi0.csv") && paths.contains(&"report.json"));
}

#[test]
fn repeated_runs_produce_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let mut hashes = Vec::new();
    for _ in 0..2 {
        // Same directory both times: the output dir is part of the recorded config.
        if dir.exists() {
            std::fs::remove_dir_all(&dir).unwrap();
        }
        let run = elwave(&[
            "--preset", "smoke", "--out", dir.to_str().unwrap(), "evolve", "--t-max", "1.0",
        ]);
        assert!(run.status.code() == Some(0) || run.status.code() == Some(1), "{}", String::from_utf8_lossy(&run.stderr));
        let m = manifest(&dir);
        let det: Vec<(String, String)> = m["files"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["deterministic"].as_bool().unwrap())
            .map(|e| (e["path"].as_str().unwrap().to_owned(), e["sha256"].as_str().unwrap().to_owned()))
            .collect();
        assert!(det.len() > 2);
        hashes.push(det);
    }
    assert_eq!(hashes[0], hashes[1]);
}
