//! End-to-end runs of the `rbcsim` binary.

use std::path::Path;
use std::process::{Command, Output};

use rbcsim::report::read_csv;

fn rbcsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbcsim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = r#"
[geometry]
tx_focal_m = 0.05
tx_interval_m = 0.052
tx_radius_m = 0.001
rx_focal_m = 0.05
rx_interval_m = 0.052
rx_radius_m = 0.001
gain_radius_m = 0.0006
position_m = [0.0, 0.0, 0.2]

[grid]
n = 64
window_m = 0.006

[foxli]
max_iterations = 200

[sweep]
axis = "y"
start_m = -0.0004
stop_m = 0.0004
steps = 3
"#;

#[test]
fn safety_prints_compliant_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbcsim(dir.path(), &["safety"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("compliant"));
    let csv = std::fs::read_to_string(dir.path().join("safety.csv")).unwrap();
    assert!(csv.contains("verdict,compliant"));
}

#[test]
fn stability_verdicts_follow_distance() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbcsim(dir.path(), &["stability", "--distances", "2,3.5"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].starts_with("2,stable"));
    assert!(lines[2].starts_with("3.5,unstable"));
}

#[test]
fn raytrace_and_calibrate_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rbcsim(dir.path(), &["raytrace", "--side", "4"]).status.success());
    assert!(dir.path().join("raytrace.csv").exists());
    assert!(rbcsim(dir.path(), &["calibrate"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("calibrate.csv")).unwrap();
    assert!(csv.contains("g0_lg,"));
}

#[test]
fn sweep_writes_csv_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = rbcsim(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result = read_csv(&dir.path().join("sweep_y.csv")).unwrap();
    assert_eq!(result.records.len(), 3);
    assert_eq!(result.metadata.timestamp, 1_700_000_000);
    assert_eq!(result.metadata.axis, "y");
    let svg = std::fs::read_to_string(dir.path().join("sweep_y.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn no_plot_flag_suppresses_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = rbcsim(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "--no-plot", "sweep", "--steps", "2"],
    );
    assert!(o.status.success());
    assert!(dir.path().join("sweep_y.csv").exists());
    assert!(!dir.path().join("sweep_y.svg").exists());
}

#[test]
fn mode_dumps_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = rbcsim(dir.path(), &["--config", cfg.to_str().unwrap(), "mode", "--binary"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bin = std::fs::read(dir.path().join("mode_field.bin")).unwrap();
    assert_eq!(bin.len(), 24 + 16 * 64 * 64);
    let field = std::fs::read_to_string(dir.path().join("mode_field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 64 * 64);
}

#[test]
fn bad_config_is_rejected_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[geometry]\nreflectivity = 1.5\n").unwrap();
    let o = rbcsim(dir.path(), &["--config", cfg.to_str().unwrap(), "mode"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("reflectivity"));
}
