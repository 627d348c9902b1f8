//! End-to-end checks of the binary: config parsing, report files, exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergkern"))
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

const RADIAL_CFG: &str = r#"{
    "model": {"kind": "radial", "d": 1,
              "profile": {"family": "polynomial", "terms": [[1, 1.0]]}},
    "n": 32,
    "grid": {"max": 1.0, "step": 0.25}
}"#;

#[test]
fn kernel_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, RADIAL_CFG);
    let out = dir.path().join("report.csv");
    let status = bin()
        .args(["kernel", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("s,ln_k_diag,k_diag"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // s = 0: K_n(0,0) = n for Ginibre d=1
    assert_eq!(first[0], 0.0);
    assert!((first[2] - 32.0).abs() < 1e-9 * 32.0, "K(0,0) = {}", first[2]);
}

#[test]
fn variance_json_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"{
            "model": {"kind": "radial", "d": 1,
                      "profile": {"family": "polynomial", "terms": [[1, 1.0]]}},
            "n": 64, "delta": 0.0, "trials": 0
        }"#,
    );
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["variance", "--format", "json", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "bergkern/1");
    assert_eq!(v["command"], "variance");
    assert!(v["rows"].is_array());
    assert_eq!(v["config"]["n"], 64);
}

#[test]
fn n_override_from_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, RADIAL_CFG);
    let output = bin()
        .args(["kernel", "--n", "16", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("# n = 1.6000000000000000e1"), "{text}");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "{ not json");
    let output = bin().args(["kernel", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("invalid input"));
}

#[test]
fn missing_config_exits_2() {
    let output = bin().arg("kernel").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // decreasing potential: fails validation
    let cfg = write_config(
        &dir,
        r#"{
            "model": {"kind": "radial", "d": 1,
                      "profile": {"family": "polynomial", "terms": [[1, -1.0]]}},
            "n": 8
        }"#,
    );
    let output = bin().args(["kernel", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}
