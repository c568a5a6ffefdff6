use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stereoskew"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn here() -> std::path::PathBuf {
    std::env::current_dir().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL_2D: &str = r#"
mode = "2d"

[rig]
d_cm = 25.0

[range]
step_cm = 10.0

[displacement]
dx_cm = 0.01

[[outputs]]
kind = "cells"
path = "cells.csv"

[[outputs]]
kind = "summary"
path = "summary.json"

[[outputs]]
kind = "heatmap"
path = "map.svg"
"#;

#[test]
fn locate_angles_planar() {
    let out = run(
        &["locate", "angles", "--d", "25", "--point", "0,25"],
        &here(),
    );
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        "alpha1=0.785398163, alpha2=2.356194490"
    );
}

#[test]
fn locate_point_round_trip() {
    let out = run(
        &[
            "locate",
            "point",
            "--d",
            "25",
            "--alpha1",
            "0.785398163",
            "--alpha2",
            "2.356194490",
        ],
        &here(),
    );
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0,25");
}

#[test]
fn locate_spatial_round_trip() {
    let out = run(
        &["locate", "angles", "--d", "25", "--point", "70,240,-65"],
        &here(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let angles: Vec<&str> = text
        .trim()
        .split(", ")
        .map(|kv| kv.split_once('=').unwrap().1)
        .collect();
    assert_eq!(angles.len(), 6);
    let mut args = vec!["locate", "point", "--d", "25"];
    let names = [
        "--alpha1", "--beta1", "--gamma1", "--alpha2", "--beta2", "--gamma2",
    ];
    for (n, v) in names.iter().zip(&angles) {
        args.push(n);
        args.push(v);
    }
    let out = run(&args, &here());
    assert!(out.status.success());
    // Nine decimals of angle leave about 1e-6 cm at this range.
    let p: Vec<f64> = stdout(&out)
        .trim()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    for (got, want) in p.iter().zip([70.0, 240.0, -65.0]) {
        assert!((got - want).abs() < 1e-5, "{p:?}");
    }
}

#[test]
fn parallel_rays_exit_two() {
    let out = run(
        &[
            "locate", "point", "--d", "25", "--alpha1", "1", "--alpha2", "1",
        ],
        &here(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parallel"));
}

#[test]
fn malformed_args_exit_one() {
    assert_eq!(
        run(&["locate", "angles", "--d", "25", "--point", "1"], &here())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["locate", "angles", "--point", "0,25"], &here())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"], &here()).status.code(), Some(1));
    assert_eq!(run(&["--help"], &here()).status.code(), Some(0));
}

#[test]
fn error_lateral_corner() {
    let out = run(
        &[
            "error", "--d", "25", "--point", "70,240", "--disp", "0.01,0", "--conv", "midpoint",
        ],
        &here(),
    );
    assert!(out.status.success());
    let v = json(&out);
    let e = v["error_magnitude_cm"].as_f64().unwrap();
    assert!((e - 0.050).abs() < 0.002, "{e}");
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys[0], "convention");
    assert!(keys.contains(&"approx_error_vector_cm"));
}

#[test]
fn error_from_motion() {
    let out = run(
        &[
            "error", "--d", "25", "--point", "-70,90", "--motion", "0,10,0", "--dt", "0.001",
            "--conv", "midpoint",
        ],
        &here(),
    );
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["displacement_cm"]["dy"].as_f64(), Some(0.01));
    let e = v["error_magnitude_cm"].as_f64().unwrap();
    assert!((e - 0.017).abs() < 0.002, "{e}");
}

#[test]
fn error_without_motion_is_zero() {
    let out = run(
        &["error", "--d", "25", "--point", "0,100", "--disp", "0,0"],
        &here(),
    );
    assert!(out.status.success());
    assert!(json(&out)["error_magnitude_cm"].as_f64().unwrap() < 1e-9);
}

#[test]
fn error_behind_baseline_exit_two() {
    let out = run(
        &["error", "--d", "25", "--point", "0,-5", "--disp", "0,0"],
        &here(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn approx_check_exit_codes() {
    let ok = run(
        &["approx-check", "--disp", "0.01,0", "--step", "5"],
        &here(),
    );
    assert_eq!(ok.status.code(), Some(0));
    assert!(json(&ok)["worst_gap"].as_f64().unwrap() < 0.01);
    let big = run(
        &["approx-check", "--disp", "1.0,0,0", "--step", "5"],
        &here(),
    );
    assert_eq!(big.status.code(), Some(3));
    let zero = run(&["approx-check", "--disp", "0,0,0"], &here());
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn approx_check_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "approx-check",
            "--disp",
            "0.01,0",
            "--step",
            "10",
            "--table",
            "gap.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let table = fs::read_to_string(dir.path().join("gap.csv")).unwrap();
    assert!(table.starts_with("x_cm,y_cm,z_cm,exact_err_cm,approx_err_cm,rel_gap\n"));
    assert_eq!(table.lines().count(), 1 + 15 * 16);
}

#[test]
fn sweep_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL_2D).unwrap();
    let out = run(&["sweep", "run.toml"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cells = fs::read(dir.path().join("cells.csv")).unwrap();
    let summary = fs::read(dir.path().join("summary.json")).unwrap();
    assert!(fs::read_to_string(dir.path().join("map.svg"))
        .unwrap()
        .starts_with("<svg"));
    // 15 x values by 16 y values, plus the header.
    assert_eq!(String::from_utf8_lossy(&cells).lines().count(), 1 + 15 * 16);

    let again = run(&["sweep", "run.toml"], dir.path());
    assert!(again.status.success());
    assert_eq!(fs::read(dir.path().join("cells.csv")).unwrap(), cells);
    assert_eq!(fs::read(dir.path().join("summary.json")).unwrap(), summary);

    let v: Value = serde_json::from_slice(&summary).unwrap();
    assert_eq!(
        v["argmax_points_cm"],
        serde_json::json!([[70.0, 240.0, 0.0]])
    );
    assert_eq!(v["config"]["rig"]["d_cm"].as_f64(), Some(25.0));
}

#[test]
fn sweep_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL_2D).unwrap();
    let out = run(
        &["sweep", "run.toml", "--d", "12.5", "--disp", "0,0.01"],
        dir.path(),
    );
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["config"]["rig"]["d_cm"].as_f64(), Some(12.5));
    assert_eq!(v["displacement_cm"]["dy"].as_f64(), Some(0.01));
}

#[test]
fn sweep_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[rig]
d_cm = 25.0

[range]
x = { min = 10.0, max = 10.0 }
y = { min = 150.0, max = 150.0 }

[displacement]
dx_cm = 0.01

[[outputs]]
kind = "cells"
path = "one.csv"
"#;
    fs::write(dir.path().join("one.toml"), cfg).unwrap();
    let out = run(&["sweep", "one.toml"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["cell_count"].as_u64(), Some(1));
    assert_eq!(v["max_error_cm"], v["min_error_cm"]);
    assert_eq!(
        fs::read_to_string(dir.path().join("one.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn sweep_missing_output_dir_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL_2D.replace("path = \"map.svg\"", "path = \"nowhere/map.svg\"");
    fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let out = run(&["sweep", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("cells.csv").exists());
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn sweep_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL_2D.replace("[displacement]\ndx_cm = 0.01", "[displacement]\ndx_cm = 0.01\n\n[motion]\nvx_cm_s = 1.0\nvy_cm_s = 0.0\nvz_cm_s = 0.0\ndt_s = 0.01");
    fs::write(dir.path().join("run.toml"), cfg).unwrap();
    assert_eq!(
        run(&["sweep", "run.toml"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["sweep", "absent.toml"], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn report_regenerates_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL_2D).unwrap();
    assert!(run(&["sweep", "run.toml"], dir.path()).status.success());
    let out = run(
        &[
            "report",
            "cells.csv",
            "--summary",
            "again.json",
            "--heatmap",
            "again.svg",
            "--plane",
            "yx",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let original: Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let again: Value =
        serde_json::from_slice(&fs::read(dir.path().join("again.json")).unwrap()).unwrap();
    for key in [
        "max_error_cm",
        "argmax_points_cm",
        "min_error_cm",
        "cell_count",
    ] {
        assert_eq!(original[key], again[key], "{key}");
    }
    assert!(fs::read_to_string(dir.path().join("again.svg"))
        .unwrap()
        .contains("</svg>"));
}
