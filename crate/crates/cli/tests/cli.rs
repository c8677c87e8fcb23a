use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shrinker(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinker")).args(args).env("SHRINKER_OUT_DIR", dir).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn integrate_sphere_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["integrate", "--n", "2", "--axis-start", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(csv.starts_with("s,x,r,alpha\n"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[2] < 1e-8 && (last[1] + 2.0).abs() < 1e-6);
    let side = json(&dir.path().join("curve.json"));
    assert_eq!(side["termination"], "AxisHit");
    assert_eq!(side["segments"].as_array().unwrap().len(), 1);
}

#[test]
fn integrate_interior_lists_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["integrate", "--n", "2", "--r0", "1.2", "--alpha0", "0", "--max-arclength", "80", "--name", "g"]);
    assert_eq!(out.status.code(), Some(0));
    let side = json(&dir.path().join("g.json"));
    assert!(side["segments"].as_array().unwrap().len() > 3);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(shrinker(dir.path(), &["integrate", "--axis-start", "2"]).status.code(), Some(2));
    assert_eq!(shrinker(dir.path(), &["integrate", "--n", "2"]).status.code(), Some(2));
    assert_eq!(shrinker(dir.path(), &["integrate", "--n", "1", "--axis-start", "2"]).status.code(), Some(2));
    assert_eq!(shrinker(dir.path(), &["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(shrinker(dir.path(), &["find", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn integrator_failure_exits_one_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["integrate", "--n", "2", "--r0", "1", "--max-step", "1e-9", "--max-arclength", "1"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn verify_legendre_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["verify", "--n", "2", "--suite", "legendre"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&dir.path().join("verify-legendre.json"));
    assert!(reports.as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn verify_quarter_spheres_n3_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["verify", "--n", "3", "--suite", "quarter-spheres"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("verify-quarter-spheres.json")).as_array().unwrap().len(), 100);
}

#[test]
fn find_plane_family_starts_at_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["find", "--n", "2", "--near", "plane", "--count", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let m = json(&dir.path().join("near-plane/manifest.json"));
    let entries = m["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["t_k"].as_f64().unwrap(), 2.0);
    assert_eq!(entries[1]["segment_count"], 2);
    assert!(dir.path().join("near-plane/k1.csv").exists());
}

#[test]
fn find_torus_family_starts_at_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinker(dir.path(), &["find", "--n", "2", "--near", "torus", "--count", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let m = json(&dir.path().join("near-torus/manifest.json"));
    let t0 = m["entries"][0]["t_k"].as_f64().unwrap();
    assert!((t0 - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn angenent_torus_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(shrinker(d, &["find", "--n", "2", "--angenent-torus"]).status.code(), Some(0));
    let m = json(&d.join("angenent-torus/manifest.json"));
    assert!((m["r_ang"].as_f64().unwrap() - 0.437_123_967_095_8).abs() < 1e-9);
    assert!((m["gauss_bonnet"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-3);
    let csv = d.join("angenent-torus/torus.csv");
    let csv = csv.to_str().unwrap();
    let svg1 = d.join("a.svg");
    let svg2 = d.join("b.svg");
    let obj = d.join("t.obj");
    let out = shrinker(d, &["render", "--n", "2", csv, "--svg", svg1.to_str().unwrap(), "--obj", obj.to_str().unwrap(), "--azimuthal-samples", "16"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Euler characteristic 0"));
    shrinker(d, &["render", "--n", "2", csv, "--svg", svg2.to_str().unwrap()]);
    assert_eq!(fs::read(&svg1).unwrap(), fs::read(&svg2).unwrap());
    let bad = shrinker(d, &["render", "--n", "3", csv, "--obj", obj.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        shrinker(d, &["find", "--n", "2", "--near", "plane", "--count", "2"]);
        shrinker(d, &["integrate", "--n", "3", "--r0", "0.7", "--alpha0", "0.4", "--max-arclength", "30"]);
    }
    for f in ["near-plane/manifest.json", "near-plane/k1.csv", "near-plane/k1.json", "curve.csv", "curve.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
