//! End-to-end runs of the `esrl` binary with its embedded server.

use std::path::PathBuf;
use std::process::{Command, Output};

fn esrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esrl")).args(args).output().expect("binary runs")
}

fn profile() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/profiles/design-z39.profile");
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_accepts_the_shipped_profile() {
    let o = esrl(&["validate", "--profile", &profile()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "valid");
}

#[test]
fn repro_fig4_prints_the_reference_counts() {
    let o = esrl(&["repro", "fig4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("PASS Q4 at v4: expected 0, got 0"), "{out}");
    assert!(out.contains("PASS Q6 at v4: expected 2, got 2"), "{out}");
    assert!(out.contains("got {0,1,1}"), "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn repro_profile_checks_pass() {
    let o = esrl(&["repro", "profile", "--profile", &profile()]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(&cfg, "ebn0_db = [1.0]\nmax_iterations = 3\n").unwrap();
    let out = dir.path().join("fer.csv");
    let o = esrl(&[
        "simulate",
        "--profile",
        &profile(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_iterations"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    // broken TOML syntax is a usage error too
    std::fs::write(&cfg, "ebn0_db = [1.0\n").unwrap();
    let o = esrl(&["simulate", "--profile", &profile(), "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(&cfg, "length = 4\npruning = 6\nebn0_db = [4.0]\nmax_frames = 32\n[decoder]\nmax_iter = 3\n").unwrap();
    let out = dir.path().join("fer.csv");
    let o = esrl(&[
        "simulate",
        "--profile",
        &profile(),
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "seed=5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.contains("\nebn0_db,metric,value,ci_low,ci_high\n"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fer.csv.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["seed"], 5);
    assert_eq!(side["config"]["decoder"]["max_iter"], 3);
    assert_eq!(side["points"][0]["frames"], 32);
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.profile");
    std::fs::write(&bad, "not a profile").unwrap();
    let o = esrl(&["validate", "--profile", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = esrl(&["threshold", "--profile", &profile(), "--set", "pruning=3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_config_keys() {
    let o = esrl(&["simulate", "--help"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for key in ["decoder.max_iter = 5", "min_errors = 100", "pruning = <rows>", "decoder.window"] {
        assert!(out.contains(key), "missing {key}");
    }
    let out = stdout(&esrl(&["design", "--help"]));
    assert!(out.contains("girth = 8") && out.contains("rca.iterations"), "{out}");
    assert_eq!(esrl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn encode_reports_zero_syndrome() {
    let o = esrl(&["encode", "--profile", &profile(), "--set", "length=3", "--set", "pruning=4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["syndrome_zero"], true);
}
