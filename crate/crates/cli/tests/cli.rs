//! End-to-end checks of the binary: exit codes, determinism, compare.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_horizonlab")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("horizonlab-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run_scenario(file: &str, out: &Path) -> Output {
    Command::new(bin())
        .args(["run", "--scenario"])
        .arg(scenario(file))
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn schema_prints_nonempty_json() {
    let out = Command::new(bin()).arg("schema").output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["properties"]["task"]["enum"].is_array());
}

#[test]
fn malformed_scenario_exits_2_without_artifacts() {
    let dir = tmp_dir("bad");
    let bad = std::env::temp_dir().join(format!("horizonlab-bad-{}.json", std::process::id()));
    fs::write(&bad, r#"{"task":"horizon"}"#).unwrap();
    let out = Command::new(bin())
        .args(["run", "--scenario"])
        .arg(&bad)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists(), "partial artifacts written");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("metric"), "stderr: {msg}");
}

#[test]
fn identical_runs_are_byte_identical_and_diff_zero() {
    let (dir_a, dir_b) = (tmp_dir("det-a"), tmp_dir("det-b"));
    assert!(run_scenario("classify_constant.json", &dir_a).status.success());
    assert!(run_scenario("classify_constant.json", &dir_b).status.success());
    let a = fs::read(dir_a.join("classify.csv")).unwrap();
    let b = fs::read(dir_b.join("classify.csv")).unwrap();
    assert_eq!(a, b);

    let out = Command::new(bin())
        .arg("compare")
        .arg(&dir_a)
        .arg(&dir_b)
        .args(["--tolerance", "0.0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["overall_max_abs"].as_f64(), Some(0.0));
}

#[test]
fn compare_rejects_mismatched_tasks() {
    let (dir_a, dir_b) = (tmp_dir("mix-a"), tmp_dir("mix-b"));
    assert!(run_scenario("classify_constant.json", &dir_a).status.success());
    assert!(run_scenario("trajectories_fan.json", &dir_b).status.success());
    let out = Command::new(bin())
        .arg("compare")
        .arg(&dir_a)
        .arg(&dir_b)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn horizon_task_writes_curve_and_limits() {
    let dir = tmp_dir("hor");
    assert!(run_scenario("horizon_tanh_shooting.json", &dir).status.success());
    let limits: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("limits.json")).unwrap()).unwrap();
    assert!((limits["limit_neg_inf"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert!((limits["limit_pos_inf"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    let csv = fs::read_to_string(dir.join("horizon.csv")).unwrap();
    assert!(csv.starts_with("x0,r\r\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn shooting_and_picard_runs_compare_within_1e5() {
    let (dir_a, dir_b) = (tmp_dir("shoot"), tmp_dir("picard"));
    assert!(run_scenario("horizon_tanh_shooting.json", &dir_a).status.success());
    assert!(run_scenario("horizon_tanh_picard.json", &dir_b).status.success());
    let out = Command::new(bin())
        .arg("compare")
        .arg(&dir_a)
        .arg(&dir_b)
        .args(["--tolerance", "1e-5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn figures_task_reflects_trapping_census() {
    let dir = tmp_dir("fig");
    assert!(run_scenario("fig1_black_hole.json", &dir).status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    // five seeds below r = 1 fall in, the ray at r = 1 rides the horizon,
    // and the outer seeds escape as the window allows; every minus ray
    // collapses
    assert_eq!(summary["metrics"]["plus_hits"].as_u64(), Some(5));
    assert_eq!(summary["metrics"]["plus_escapes"].as_u64(), Some(4));
    assert_eq!(summary["metrics"]["minus_hits"].as_u64(), Some(11));
    for f in ["fan_plus.csv", "fan_minus.csv", "fates_plus.csv"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
}
