use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gaussframe-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussframe"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn check<'a>(m: &'a Value, name: &str) -> &'a Value {
    m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn verify_pseudosphere_datum_passes() {
    let dir = scratch("verify");
    let out = run(&["verify", "--scenario", "pseudosphere", "--k", "-2"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&out);
    assert_eq!(m["passed"], true);
    let eq = check(&m, "curvature equation");
    assert!(eq["order"].as_f64().unwrap() > 1.9);
    assert!(dir.join("curvature-equation-u.csv").exists());
    assert!(dir.join("frame.csv").exists());
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn reconstruct_gzbar_writes_mesh_and_closure_report() {
    let dir = scratch("reconstruct");
    let out = run(&["reconstruct", "--scenario", "gzbar", "--group", "s3", "--k", "1", "--export", "obj"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&out);
    assert!(check(&m, "loop closure defect")["passed"].as_bool().unwrap());
    assert!(check(&m, "extrinsic curvature error")["passed"].as_bool().unwrap());
    let obj = fs::read_to_string(dir.join("surface.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn correspond_recovers_constant_sphere_curvature() {
    let dir = scratch("correspond");
    let out = run(
        &[
            "correspond",
            "--direction",
            "r3-to-s3",
            "--branch",
            "negative",
            "--base",
            "-2",
            "--scenario",
            "s5-pseudosphere",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&out);
    assert!((m["notes"]["output_min"].as_f64().unwrap() + 2.0).abs() < 1e-12);
    assert!((m["notes"]["output_max"].as_f64().unwrap() + 2.0).abs() < 1e-12);
    let csv = fs::read_to_string(dir.join("curvature.csv")).unwrap();
    assert!(csv.starts_with("x,y,val\n"));
}

#[test]
fn non_integrable_data_exit_with_failures() {
    let dir = scratch("nil");
    let out = run(&["verify", "--scenario", "gzbar", "--group", "nil3", "--tau", "1"], &dir);
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(&out);
    assert_eq!(m["passed"], false);
    let failures: Vec<&str> = m["failures"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(failures.contains(&"normal parallelism defect"));
}

#[test]
fn errors_are_machine_readable() {
    let dir = scratch("errors");
    for args in [
        &["correspond", "--direction", "s3-to-r3", "--scenario", "gzbar"][..],
        &["verify", "--scenario", "gzbar", "--branch", "negative"][..],
        &["verify", "--scenario", "torus"][..],
        &["reconstruct", "--scenario", "gzbar", "--group", "berger", "--tau", "0.4"][..],
        &["verify", "--scenario", "gzbar", "--group", "psl2"][..],
    ] {
        let out = run(args, &dir);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].is_string());
    }
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        let out = run(&["reconstruct", "--scenario", "gzbar", "--step", "0.04", "--export", "ply"], dir);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["surface.csv", "surface.ply"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn config_tolerances_decide_pass_or_fail() {
    let dir = scratch("config");
    let cfg = dir.join("tight.toml");
    fs::write(&cfg, "[tolerances]\nfd_scale = 1e-6\n\n[scenario]\nscenario = \"gzbar\"\nstep = 0.04\n").unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], &dir.join("run"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(manifest(&out)["tolerances"]["fd_scale"], 1e-6);
    let bad = dir.join("bad.toml");
    fs::write(&bad, "[tolerances]\nunknown = 1\n").unwrap();
    let out = run(&["verify", "--scenario", "gzbar", "--config", bad.to_str().unwrap()], &dir.join("run"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gauss_map_file_source() {
    let dir = scratch("file");
    let (x0, y0, h, n) = (-0.1, -0.2, 0.025, 33);
    let mut csv = String::from("x,y,re,im\n");
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (x0 + i as f64 * h, y0 + j as f64 * h);
            csv.push_str(&format!("{x:e},{y:e},{x:e},{:e}\n", -y));
        }
    }
    fs::write(dir.join("g.csv"), csv).unwrap();
    fs::write(
        dir.join("g.toml"),
        format!("origin = [{x0:?}, {y0:?}]\nstep = [{h:?}, {h:?}]\nsize = [{n}, {n}]\nkind = \"conformal-z\"\n"),
    )
    .unwrap();
    let g = dir.join("g.csv");
    let out = run(&["verify", "--gauss-map", g.to_str().unwrap(), "--k", "1"], &dir.join("run"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let m = manifest(&out);
    assert!(check(&m, "normal parallelism defect")["order"].is_null());
    let out = run(&["verify", "--gauss-map", g.to_str().unwrap(), "--k", "1", "--step", "0.01"], &dir.join("run"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_and_export_on_reference_spheres() {
    let dir = scratch("spheres");
    let out = run(&["oracle", "--scenario", "distance-sphere(0.6)", "--step", "0.04"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("oracle.csv")).unwrap();
    let k: f64 = csv.lines().nth(1).unwrap().split(',').next_back().unwrap().parse().unwrap();
    assert!((k - (1.0 / 0.6_f64.tan()).powi(2)).abs() < 1e-5);
    let out = run(&["export", "--scenario", "great-sphere", "--step", "0.1", "--pole", "0"], &dir);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("surface.obj").exists());
}

#[test]
fn revolution_surface_reports_profile() {
    let dir = scratch("revolution");
    let out = run(&["reconstruct", "--revolution"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&out);
    assert!(m["notes"]["planar_profile_defect"].as_f64().unwrap() > 0.1);
    assert!(fs::read_to_string(dir.join("profile.csv")).unwrap().starts_with("s,alpha,beta\n"));
}
