use std::path::Path;
use std::process::{Command, Output};

use bosefp::harness::{scenarios, ConfigFile, Tolerances};

fn bosefp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosefp")).args(args).output().unwrap()
}

fn write_small_config(dir: &Path) -> String {
    let mut s = scenarios::stationary("small", 0.5, 65, 3.193_673_375_529_992_3);
    s.t_end = 1.0;
    let cfg = ConfigFile {
        tolerances: Tolerances::default(),
        scenario: vec![s],
    };
    let path = dir.join("small.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn equilibrium_prints_the_critical_mass() {
    let out = bosefp(&["equilibrium", "--gamma", "4", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mc = v["m_c"].as_f64().unwrap();
    assert!((mc - 3.193_673_375_529_992_3).abs() < 1e-10, "m_c = {mc}");
    assert_eq!(v["m_c_finite"], serde_json::Value::Bool(true));
}

#[test]
fn missing_config_is_a_configuration_error() {
    let out = bosefp(&["--config", "/nonexistent/cfg.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn simulate_verify_and_fit_on_a_saved_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let runs = dir.path().join("runs");
    let runs_s = runs.to_str().unwrap();

    let out = bosefp(&["--config", &cfg, "--out", runs_s, "simulate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("scenario small: pass"));

    let run = runs.join("small");
    let out = bosefp(&["verify", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");

    // A bounded subcritical state has no singular profile to fit.
    let out = bosefp(&["profile-fit", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = bosefp(&["compare", run.to_str().unwrap(), run.to_str().unwrap(), "--ordered"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_criterion_is_a_configuration_error() {
    let out = bosefp(&["verify", "--criteria", "A99"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL A99"));
}
