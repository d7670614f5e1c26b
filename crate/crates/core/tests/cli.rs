use std::path::Path;
use std::process::{Command, Output};

use sic_relay::ScenarioConfig;

fn sicrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sicrelay"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &ScenarioConfig::symmetric(2, 1.0, 1.0).with_trials(5_000),
    );
    let out = dir.path().join("sweep.csv");
    let o = sicrelay(&[
        "sweep",
        "--config",
        &cfg,
        "--snr-db",
        "0:5:30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0].split(',').count(), 7);
    assert!(lines[1].starts_with("0,"), "{}", lines[1]);
    assert!(dir.path().join("sweep.csv.manifest.json").exists());
}

#[test]
fn missing_config_is_reported() {
    let o = sicrelay(&[
        "sweep",
        "--config",
        "/nonexistent/cfg.toml",
        "--snr-db",
        "0:5:10",
        "--out",
        "/tmp/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.toml"));
}

#[test]
fn rerun_at_other_worker_counts_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &ScenarioConfig::symmetric(3, 1.0, 2.0)
            .with_trials(20_000)
            .with_seed(31),
    );
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    let o = sicrelay(&[
        "--workers",
        "1",
        "sweep",
        "--config",
        &cfg,
        "--snr-db",
        "-5:5:15",
        "--out",
        &p("a.csv"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = sicrelay(&[
        "--workers",
        "8",
        "rerun",
        &p("a.csv.manifest.json"),
        "--out",
        &p("b.csv"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(p("a.csv")).unwrap(),
        std::fs::read(p("b.csv")).unwrap()
    );
}

#[test]
fn validate_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let o = sicrelay(&["validate", "--json", json.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(report.as_array().is_some_and(|a| !a.is_empty()), "{report}");
}

#[test]
fn dmt_rejects_a_window_without_enough_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ScenarioConfig::symmetric(2, 1.0, 1.0));
    let o = sicrelay(&[
        "dmt",
        "--config",
        &cfg,
        "--window",
        "40:44",
        "--trials-per-event",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preselect_rejects_more_used_than_available() {
    let o = sicrelay(&["preselect", "--n-relays", "3", "--n-used", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sicrelay(&["preselect", "--n-relays", "6", "--n-used", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
