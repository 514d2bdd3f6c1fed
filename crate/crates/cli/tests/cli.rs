use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fiberspec(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberspec"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn unknown_command_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fiberspec(&["plot"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn missing_command_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fiberspec(&[], dir.path()).status.code(), Some(2));
    assert_eq!(
        fiberspec(&["mesh", "--threads", "0"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn limit_spectrum_writes_hashed_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = fiberspec(&["limit-spectrum", "--out", out_dir.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("limit_spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "j,gamma_j,lambda_k,S,delta_check");
    assert_eq!(lines.count(), 6);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("limit_spectrum.json")).unwrap()).unwrap();
    let lambda_1 = json["roots"][0]["lambda"].as_f64().unwrap();
    assert!((lambda_1 - 7.829_308_870_425_887).abs() < 1e-9);
}

#[test]
fn config_file_and_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"n_div": 12, "output_dir": "mesh_out"}"#).unwrap();
    let out = fiberspec(&["mesh", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("mesh_out/mesh.txt")).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# config_hash="));
}

#[test]
fn bad_config_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"geometry": {"r": 0.6}}"#).unwrap();
    let out = fiberspec(&["limit-spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("geometry.r"));

    fs::write(&cfg, r#"{"n_dvi": 3}"#).unwrap();
    let out = fiberspec(&["mesh", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn eps_spectrum_on_coarse_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"n_div": 16, "eps": 0.2, "k_total": 6, "output_dir": "o"}"#).unwrap();
    let out = fiberspec(
        &["eps-spectrum", "--config", cfg.to_str().unwrap(), "--threads", "1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/eps_spectrum.csv")).unwrap();
    let values: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
}
