use std::process::Command;

fn emhd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emhd"))
}

#[test]
fn params_prints_worked_values() {
    let out = emhd()
        .args(["params", "--alpha", "1.5", "--beta", "1.5", "--s", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{key}=")))
            .unwrap();
        line.split_once('=').unwrap().1.parse().unwrap()
    };
    assert!((value("theta") - 1.0 / 6.0).abs() < 1e-12, "{text}");
    assert!((value("epsilon") - 0.25).abs() < 1e-12);
    assert!((value("gamma") - 3.0).abs() < 1e-12);
    let bad = emhd()
        .args(["params", "--alpha", "1", "--beta", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn run_uses_output_root_and_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emhd()
        .env("EMHD_OUTPUT_ROOT", tmp.path())
        .args([
            "run",
            "--grid",
            "32",
            "--dt",
            "0.01",
            "--t-end",
            "0.03",
            "--preset",
            "cosx_cos2y",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("run");
    let cfg = emhd_runner::RunConfig::load(&dir.join("config.toml")).unwrap();
    assert_eq!(cfg.grid.n(), 32);
    assert_eq!(cfg.integrator.t_end, 0.03);
    assert!(dir.join("series.csv").is_file());
}

#[test]
fn config_file_then_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = emhd_runner::RunConfig::example(tmp.path().join("from_file"));
    cfg.grid = emhd_core::spectral::GridSpec::new(32).unwrap();
    cfg.integrator = emhd_core::integrator::IntegratorConfig::fixed(0.01, 0.02);
    let path = tmp.path().join("cfg.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let out = emhd()
        .arg("run")
        .arg("--config")
        .arg(&path)
        .args(["--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let written = emhd_runner::RunConfig::load(&tmp.path().join("from_file/config.toml")).unwrap();
    assert_eq!(written.seed, 9);
    assert_eq!(written.integrator.t_end, 0.02);
}

#[test]
fn configuration_errors_exit_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emhd()
        .env("EMHD_OUTPUT_ROOT", tmp.path())
        .args(["run", "--grid", "32", "--alpha", "0.9", "--beta", "0.9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha + beta"));
}

#[test]
fn blowup_threshold_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emhd()
        .env("EMHD_OUTPUT_ROOT", tmp.path())
        .args([
            "run",
            "--grid",
            "32",
            "--preset",
            "eigen",
            "--blowup-threshold",
            "1e-3",
            "--t-end",
            "0.01",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let meta = emhd_runner::output::read_key_values(&tmp.path().join("run/metadata.txt")).unwrap();
    assert_eq!(meta["termination"], "threshold_exceeded");
}
