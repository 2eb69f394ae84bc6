//! End-to-end behavior of the binary: outputs, determinism, exit codes,
//! and config precedence.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_poncelet")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("poncelet-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (Option<i32>, String, String) {
    let out = Command::new(bin())
        .args(args)
        .env("PONCELET_NO_COLOR", "1")
        .output()
        .expect("binary runs");
    (
        out.status.code(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn grid_emits_expected_row_counts() {
    let dir = scratch("rows");
    let out = dir.join("g5").to_string_lossy().into_owned();
    let (code, _, _) = run(&["grid", "--out-dir", &out]);
    assert_eq!(code, Some(0));
    let csv = read(&dir.join("g5/grid.csv"));
    assert_eq!(csv.lines().count(), 16); // header + n(n+1)/2
    assert_eq!(csv.lines().next().unwrap(), "kind,index,j,x1,x2,chart_x,chart_y");

    let out3 = dir.join("g3").to_string_lossy().into_owned();
    let (code, _, _) = run(&["grid", "--a1sq", "1", "--a2sq", "1", "--n", "3", "--out-dir", &out3]);
    assert_eq!(code, Some(0));
    assert_eq!(read(&dir.join("g3/grid.csv")).lines().count(), 7);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn grid_reruns_are_byte_identical() {
    let dir = scratch("det");
    for tag in ["a", "b"] {
        let out = dir.join(tag).to_string_lossy().into_owned();
        let (code, _, _) = run(&["grid", "--out-dir", &out]);
        assert_eq!(code, Some(0));
    }
    for file in ["grid.csv", "grid.json", "grid.svg"] {
        assert_eq!(
            std::fs::read(dir.join("a").join(file)).unwrap(),
            std::fs::read(dir.join("b").join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn portrait_emits_curves_within_the_table() {
    let dir = scratch("portrait");
    let out = dir.join("p").to_string_lossy().into_owned();
    let (code, _, _) = run(&[
        "portrait",
        "--lambdas",
        "-1,-0.75",
        "--samples",
        "64",
        "--out-dir",
        &out,
    ]);
    assert_eq!(code, Some(0));
    let csv = read(&dir.join("p/portrait.csv"));
    assert!(csv.lines().count() > 64);
    // the focal curve passes through (0, ±√3)
    let focal_row = csv
        .lines()
        .find(|l| l.starts_with("-1.0") && l.contains(",upper,0.0"))
        .expect("focal row at phi=0");
    let p: f64 = focal_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((p - 3.0_f64.sqrt()).abs() < 1e-12);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = scratch("config");
    let cfg_path = dir.join("run.conf");
    std::fs::write(&cfg_path, "a1sq = 9\na2sq = 4\nn = 7\nseed = 7\n").unwrap();
    let out = dir.join("o").to_string_lossy().into_owned();
    // flag overrides the file's n
    let (code, _, _) = run(&[
        "grid",
        "--config",
        cfg_path.to_str().unwrap(),
        "--n",
        "5",
        "--out-dir",
        &out,
    ]);
    assert_eq!(code, Some(0));
    let json = read(&dir.join("o/grid.json"));
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["a1sq"], 9.0);
    assert_eq!(parsed["n"], 5);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_errors_exit_2() {
    let dir = scratch("bad");
    let out = dir.join("o").to_string_lossy().into_owned();
    let (code, _, err) = run(&["grid", "--n", "4", "--out-dir", &out]);
    assert_eq!(code, Some(2));
    assert!(err.contains("config error"));

    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "unknown_key = 3\n").unwrap();
    let (code, _, err) = run(&["grid", "--config", cfg.to_str().unwrap(), "--out-dir", &out]);
    assert_eq!(code, Some(2));
    assert!(err.contains("unknown key"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn circle_family_verify_skips_focal_checks() {
    let dir = scratch("circle");
    let out = dir.join("o").to_string_lossy().into_owned();
    let (code, stdout, _) = run(&["verify", "--a1sq", "1", "--a2sq", "1", "--out-dir", &out]);
    assert_eq!(code, Some(0), "circle verify failed:\n{stdout}");
    assert!(stdout.contains("skipped (degenerate family)"));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.join("o/verify_report.json"))).unwrap();
    let skipped = report["skipped"].as_array().unwrap();
    assert!(skipped.iter().any(|v| v == "elliptic_roundtrip"));
    assert!(skipped.iter().any(|v| v == "ivory_equivalence"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn rotnum_prints_circle_third() {
    let (code, stdout, _) = run(&[
        "rotnum",
        "--a1sq",
        "1",
        "--a2sq",
        "1",
        "--lambda-caustic",
        "-0.75",
    ]);
    assert_eq!(code, Some(0));
    let c_line = stdout.lines().find(|l| l.starts_with("c = ")).unwrap();
    let c: f64 = c_line.trim_start_matches("c = ").parse().unwrap();
    assert!((c - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn string_curve_lands_on_the_boundary() {
    let dir = scratch("string");
    let out = dir.join("o").to_string_lossy().into_owned();
    let (code, stdout, _) = run(&["string", "--samples", "16", "--out-dir", &out]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("string_length"));
    let csv = read(&dir.join("o/string.csv"));
    assert_eq!(csv.lines().count(), 17);
    for line in csv.lines().skip(1) {
        let (x1, x2) = line.split_once(',').unwrap();
        let (x1, x2): (f64, f64) = (x1.parse().unwrap(), x2.parse().unwrap());
        let residual = x1 * x1 / 4.0 + x2 * x2 - 1.0;
        assert!(residual.abs() < 1e-6, "string point off the boundary: {residual}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}
