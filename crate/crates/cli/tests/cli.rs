//! Behavior of the `spinstar` binary: exit codes, determinism, manifest
//! replay, and output shapes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinstar"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(tag);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

const MEANFIELD_CONFIG: &str = r#"{
  "command": "meanfield",
  "meanfield": { "system": "reduced", "omega": 0.15, "kappa": 0.1 },
  "time": { "t_end": 200.0, "samples": 800 },
  "output_prefix": "mf"
}"#;

#[test]
fn no_arguments_exits_2_with_usage() {
    let out = binary().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "stderr was: {stderr}");
}

#[test]
fn malformed_json_exits_2_with_error_json() {
    let dir = tmp_dir("malformed");
    let cfg = write_config(&dir, "bad.json", "{ not json");
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["error"]["kind"], "config");
}

#[test]
fn missing_params_section_exits_2() {
    let dir = tmp_dir("missing-params");
    let cfg = write_config(&dir, "cfg.json", r#"{ "command": "spectrum" }"#);
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tmp_dir("unknown-key");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{ "command": "meanfield", "meanfeild": {} }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_dir_exits_4() {
    let dir = tmp_dir("unwritable");
    let cfg = write_config(&dir, "cfg.json", MEANFIELD_CONFIG);
    // a file where the directory should go
    let blocker = dir.join("blocked");
    std::fs::write(&blocker, "x").unwrap();
    let out = binary().arg(&cfg).arg("--output-dir").arg(&blocker).output().unwrap();
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir_a = tmp_dir("det-a");
    let dir_b = tmp_dir("det-b");
    let cfg = write_config(&dir_a, "cfg.json", MEANFIELD_CONFIG);
    for dir in [&dir_a, &dir_b] {
        let out = binary().arg(&cfg).arg("--output-dir").arg(dir).output().unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["mf_meanfield.csv", "mf_frequencies.json", "mf_manifest.json"] {
        assert_eq!(read(&dir_a, name), read(&dir_b, name), "{name} differs");
    }
}

#[test]
fn manifest_replay_reproduces_the_run() {
    let dir_a = tmp_dir("replay-a");
    let dir_b = tmp_dir("replay-b");
    let cfg = write_config(&dir_a, "cfg.json", MEANFIELD_CONFIG);
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir_a).output().unwrap();
    assert!(out.status.success());

    let manifest = dir_a.join("mf_manifest.json");
    let out = binary().arg(&manifest).arg("--output-dir").arg(&dir_b).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["mf_meanfield.csv", "mf_frequencies.json", "mf_manifest.json"] {
        assert_eq!(read(&dir_a, name), read(&dir_b, name), "{name} differs after replay");
    }
}

fn parse_spectrum_csv(text: &str) -> Vec<(f64, f64, u8)> {
    text.lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            (
                cols[0].parse().unwrap(),
                cols[1].parse().unwrap(),
                cols[2].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn spectrum_outputs_clouds_that_overlap() {
    let dir = tmp_dir("spectrum");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
          "command": "spectrum",
          "params": {
            "omega_c": 0.1, "omega_a": 0.01,
            "j": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.01, 0.0, 0.0]],
            "gamma_reduced": 15.0, "n_ancilla": 6
          },
          "output_prefix": "spec"
        }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let full = parse_spectrum_csv(&read(&dir, "spec_spectrum_full.csv"));
    let effective = parse_spectrum_csv(&read(&dir, "spec_spectrum_effective.csv"));
    assert_eq!(full.len(), 4 * 49);
    assert_eq!(effective.len(), 49);

    // every stripe-0 point sits on top of an effective-model point
    let stripe0: Vec<&(f64, f64, u8)> = full.iter().filter(|p| p.2 == 0).collect();
    assert_eq!(stripe0.len(), 49);
    for p in stripe0 {
        let nearest = effective
            .iter()
            .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 5e-2, "stripe-0 point ({}, {}) strays by {nearest}", p.0, p.1);
    }
}

#[test]
fn reduce_emits_effective_model_record() {
    let dir = tmp_dir("reduce");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
          "command": "reduce",
          "params": {
            "omega_c": 0.0, "omega_a": 0.05,
            "j": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.3, 0.0, 0.1]],
            "gamma_reduced": 40.0, "n_ancilla": 4
          },
          "output_prefix": "red"
        }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert!(out.status.success());
    let model: serde_json::Value =
        serde_json::from_str(&read(&dir, "red_effective_model.json")).unwrap();
    assert_eq!(model["schema"], "spinstar-effective-model/1");
    assert_eq!(model["kossakowski"][0][0][0], 4.0);
    assert_eq!(model["jump_terms"].as_array().unwrap().len(), 1);
    assert_eq!(model["truncation"]["validity_warning"], false);
}

#[test]
fn fixed_points_report_both_families() {
    let dir = tmp_dir("fixed-points");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
          "command": "fixed-points",
          "meanfield": { "system": "reduced", "omega": 1.5, "kappa": 1.0 },
          "output_prefix": "fp"
        }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir, "fp_fixed_points.json")).unwrap();
    let fps = report["fixed_points"].as_array().unwrap();
    assert_eq!(fps.len(), 4);
    let centers = fps
        .iter()
        .filter(|f| f["classification"] == "center" && f["physical"] == true)
        .count();
    assert_eq!(centers, 2);
}

#[test]
fn subcritical_meanfield_run_ends_on_a_fixed_point() {
    let dir = tmp_dir("mf-settle");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
          "command": "meanfield",
          "meanfield": { "system": "reduced", "omega": 0.9, "kappa": 1.0 },
          "time": { "t_end": 150.0, "samples": 1500 },
          "output_prefix": "settle"
        }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert!(out.status.success());
    let csv = read(&dir, "settle_meanfield.csv");
    let last = csv.lines().last().unwrap();
    let cols: Vec<f64> =
        last.split(',').take(4).map(|v| v.parse().unwrap()).collect();
    // attracting point of the m_x = 0 family: (0, Ω/κ, -sqrt(1-(Ω/κ)²))
    let expected = [0.0, 0.9, -(1.0f64 - 0.81).sqrt()];
    for (got, want) in cols[1..].iter().zip(expected) {
        assert!((got - want).abs() < 1e-6, "final m {cols:?} vs {expected:?}");
    }
}

#[test]
fn phase_scan_emits_ordered_table() {
    let dir = tmp_dir("scan");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
          "command": "phase-scan",
          "scan": {
            "gammas": [5.0, 10.0],
            "sizes": ["mean-field"],
            "omega_drive": 0.15,
            "t_end": 250.0,
            "samples": 1200
          },
          "output_prefix": "scan"
        }"#,
    );
    let out = binary().arg(&cfg).arg("--output-dir").arg(&dir).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "scan_scan.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "gamma,n,order_parameter,gap,lifetime,label");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5.00000000000e0,inf"));
    assert!(lines[1].ends_with("melted"));
    assert!(lines[2].starts_with("1.00000000000e1,inf"));
    assert!(lines[2].ends_with("ztc"));
}
