use std::path::Path;
use std::process::{Command, Output};

use survgeo::raster::io::{read_scalar_pfm, write_pfm};
use survgeo::raster::ScalarMap;

fn survgeo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_survgeo"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) {
    let o = survgeo(&["synth", "--frames", "3", "--out", "s"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn synth_writes_a_complete_scene() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let s = dir.path().join("s");
    for f in ["rig.json", "scene.json", "trajectory.json", "manifest.json", "cam1/frame0.ppm", "cam6/frame2.pfm", "poses/0_1.json"] {
        assert!(s.join(f).exists(), "missing {f}");
    }
}

#[test]
fn loss_on_ground_truth_is_small() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = survgeo(&["loss", "--manifest", "s/manifest.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total = report["total"].as_f64().unwrap();
    assert!(total.is_finite() && (0.0..1e-2).contains(&total), "total {total}");
}

#[test]
fn eval_of_ground_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = survgeo(&["eval", "--pred", "s/cam1/frame1.pfm", "--gt", "s/cam1/frame1.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["abs_rel"].as_f64(), Some(0.0));
    assert_eq!(m["delta1"].as_f64(), Some(1.0));
}

#[test]
fn invariance_checks_pass_on_synthetic_depth() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    for check in ["normal-scale", "dsc-scale", "warp-roundtrip"] {
        let o = survgeo(
            &["invariance", "--check", check, "--rig", "s/rig.json", "--camera", "1", "--depth", "s/cam1/frame1.pfm"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stderr(&o));
        let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(r["passed"].as_bool(), Some(true));
    }
}

#[test]
fn pseudo_depth_spans_the_target_range() {
    let dir = tempfile::tempdir().unwrap();
    let disp = ScalarMap::from_fn(4, 5, |r, c| Some(0.1 + (r * 5 + c) as f64));
    write_pfm(&disp, &dir.path().join("d.pfm")).unwrap();
    let o = survgeo(&["pseudo-depth", "--disparity", "d.pfm", "--d-min", "1", "--d-max", "10", "--out", "p.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = read_scalar_pfm(&dir.path().join("p.pfm")).unwrap();
    let vals: Vec<f64> = p.iter_valid().map(|(_, v)| v).collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    assert!((lo - 1.0).abs() < 1e-5 && (hi - 10.0).abs() < 1e-4, "{lo} {hi}");
}

#[test]
fn missing_input_exits_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = survgeo(&["normals", "--rig", "nope.json", "--camera", "1", "--depth", "x.pfm", "--out", "n.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.json"), "{}", stderr(&o));
}

#[test]
fn malformed_json_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    std::fs::write(dir.path().join("bad.json"), r#"{"cameras": [{"id": "one"}]}"#).unwrap();
    let o = survgeo(&["normals", "--rig", "bad.json", "--camera", "1", "--depth", "s/cam1/frame1.pfm", "--out", "n.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[Parse]"), "{}", stderr(&o));
}

#[test]
fn usage_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(survgeo(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(survgeo(&["eval", "--pred", "a.pfm"], dir.path()).status.code(), Some(2));
}

#[test]
fn computation_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = survgeo(&["normals", "--rig", "s/rig.json", "--camera", "42", "--depth", "s/cam1/frame1.pfm", "--out", "n.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[UnknownCamera]"), "{}", stderr(&o));

    let flat = ScalarMap::filled(3, 3, 2.0);
    write_pfm(&flat, &dir.path().join("flat.pfm")).unwrap();
    let o = survgeo(&["pseudo-depth", "--disparity", "flat.pfm", "--out", "p.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[ConstantMap]"), "{}", stderr(&o));
}

#[test]
fn invalid_thread_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_survgeo"))
        .args(["synth", "--out", "s"])
        .env("SURVGEO_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
