use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crgeo::format::holomap_to_string;
use crgeo_core::weierstrass::{HoloMap, Poly};
use crgeo_core::Complex64;

fn crgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crgeo")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_core_passes() {
    let o = crgeo(&["verify", "--suite", "core", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));
}

#[test]
fn unreachable_tolerance_fails() {
    let o = crgeo(&["verify", "--suite", "core", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(code(&crgeo(&["verify", "--tol", "-1"])), 2);
    assert_eq!(code(&crgeo(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&crgeo(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    assert_eq!(code(&crgeo(&["curvature", "--grid", "3x8", "--out", p(&out)])), 2);
    assert_eq!(code(&crgeo(&["curvature", "--domain", "torus", "--out", p(&out)])), 2);
}

#[test]
fn seeded_reports_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"), dir.path().join("c.jsonl"));
    for f in [&a, &b] {
        assert_eq!(code(&crgeo(&["verify", "--suite", "boundary", "--seed", "3", "--report", p(f)])), 0);
    }
    assert_eq!(code(&crgeo(&["verify", "--suite", "boundary", "--seed", "4", "--report", p(&c)])), 0);
    let (ra, rb, rc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(ra, rb);
    assert_ne!(ra, rc);
    for line in String::from_utf8(ra).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["suite"], "boundary");
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn vertical_plane_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("plane.csv");
    fs::write(&phi, holomap_to_string(&HoloMap::vertical_plane())).unwrap();
    let (mesh, report) = (dir.path().join("plane.obj"), dir.path().join("res.csv"));
    let o = crgeo(&["surface", "--phi", p(&phi), "--grid", "8x6", "--out", p(&mesh), "--report", p(&report)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let obj = fs::read_to_string(&mesh).unwrap();
    let verts: Vec<Vec<f64>> = obj
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    let faces: Vec<Vec<usize>> = obj
        .lines()
        .filter_map(|l| l.strip_prefix("f "))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(verts.len(), 48);
    assert_eq!(faces.len(), 2 * 7 * 5);
    assert!(verts.iter().all(|v| v[1] == 0.0), "plane y = 0");
    for f in &faces {
        assert!(f.iter().all(|k| (1..=48).contains(k)));
        // (x, t/√2) recovers the parameter, so orientation is visible in that plane
        let q: Vec<(f64, f64)> = f.iter().map(|k| (verts[k - 1][0], verts[k - 1][2])).collect();
        let area = (q[1].0 - q[0].0) * (q[2].1 - q[0].1) - (q[2].0 - q[0].0) * (q[1].1 - q[0].1);
        assert!(area > 0.0);
    }
    let rep = fs::read_to_string(&report).unwrap();
    assert!(rep.starts_with("ix,iy,re,im,pde_residual"));
    assert_eq!(rep.lines().count(), 49);
}

#[test]
fn higher_dimensional_surface_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut h = HoloMap::zero(2);
    h.comps[0] = Poly::constant(Complex64::new(0.5, 0.0));
    h.comps[1] = Poly::constant(Complex64::new(0.0, -0.5));
    let phi = dir.path().join("leg.csv");
    fs::write(&phi, holomap_to_string(&h)).unwrap();
    let mesh = dir.path().join("leg.mesh.csv");
    let o = crgeo(&["surface", "--phi", p(&phi), "--grid", "5", "--out", p(&mesh)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = fs::read_to_string(&mesh).unwrap();
    assert!(csv.starts_with("ix,iy,re,im,x1,x2,y1,y2,t\n"));
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn zero_data_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("zero.csv");
    fs::write(&phi, "# n 1\n1, 0, 0, 0\n").unwrap();
    let o = crgeo(&["surface", "--phi", p(&phi), "--out", p(&dir.path().join("z.obj"))]);
    assert_eq!(code(&o), 1);
    assert!(text(&o).contains("nondegeneracy"), "{}", text(&o));
    assert!(!dir.path().join("z.obj").exists());
}

#[test]
fn malformed_row_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("bad.csv");
    fs::write(&phi, "# n 1\n1, 0, 0.5, 0\n0, 0, zero, -0.7\n").unwrap();
    let o = crgeo(&["surface", "--phi", p(&phi), "--out", p(&dir.path().join("b.obj"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:3:"), "{}", text(&o));
    let o = crgeo(&["surface", "--phi", p(&dir.path().join("missing.csv")), "--out", p(&dir.path().join("b.obj"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn curvature_field_of_unit_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mu.csv");
    let o = crgeo(&["curvature", "--domain", "cylinder:1", "--grid", "12x5", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "i,j,x,y,t,mu,h_x,h_y,h_t,param_deviation");
    let want = -1.0 / (2.0 * 2f64.sqrt());
    let mut count = 0;
    for l in lines {
        let mu: f64 = l.split(',').nth(5).unwrap().parse().unwrap();
        assert!((mu - want).abs() <= 1e-10);
        count += 1;
    }
    assert_eq!(count, 60);
    let o = crgeo(&["curvature", "--domain", "plane:0.4", "--grid", "6x6", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
}

#[test]
fn fefferman_probes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    for d in ["cylinder:0.7", "halfspace:2"] {
        let o = crgeo(&["fefferman", "--domain", d, "--grid", "4x4", "--out", p(&out)]);
        assert_eq!(code(&o), 0, "{d}: {}", text(&o));
    }
    // odd grid puts a node at the origin
    let o = crgeo(&["fefferman", "--domain", "nullspace", "--grid", "5x5", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate_points 1"));
}

#[test]
fn yamabe_reference_run() {
    let dir = tempfile::tempdir().unwrap();
    let (sol, log, rep) = (dir.path().join("u.csv"), dir.path().join("log.csv"), dir.path().join("rep.csv"));
    let o = crgeo(&[
        "yamabe", "--r0", "0.5", "--r1", "1", "--length", "1", "--grid", "16x8x8", "--out", p(&sol), "--log", p(&log), "--report", p(&rep),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("Q*") && out.contains("lambda* = (p/2)Q*") && out.contains("max EL residual"));
    let s = fs::read_to_string(&sol).unwrap();
    assert!(s.starts_with("irho,ialpha,it,rho,alpha,t,u\n"));
    assert_eq!(s.lines().count(), 1 + 17 * 8 * 8);
    let l = fs::read_to_string(&log).unwrap();
    assert!(l.starts_with("iter,Q,A,B,step,grad_norm,max_el_residual\n"));
    let q: Vec<f64> = l.lines().skip(1).map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(q.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert_eq!(fs::read_to_string(&rep).unwrap().lines().count(), 2);
}

#[test]
fn yamabe_refinement_writes_tagged_files() {
    let dir = tempfile::tempdir().unwrap();
    let (sol, log) = (dir.path().join("u.csv"), dir.path().join("log.csv"));
    let o = crgeo(&["yamabe", "--grid", "8x4x4,16x4x4", "--out", p(&sol), "--log", p(&log)]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    for tag in ["8x4x4", "16x4x4"] {
        assert!(dir.path().join(format!("u.{tag}.csv")).exists());
        assert!(dir.path().join(format!("log.{tag}.csv")).exists());
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("order h"));
}

#[test]
fn yamabe_failures() {
    let dir = tempfile::tempdir().unwrap();
    let (sol, log) = (dir.path().join("u.csv"), dir.path().join("log.csv"));
    let o = crgeo(&["yamabe", "--r0", "1", "--r1", "0.5", "--out", p(&sol), "--log", p(&log)]);
    assert_eq!(code(&o), 2, "{}", text(&o));
    let o = crgeo(&["yamabe", "--max-iters", "1", "--out", p(&sol), "--log", p(&log)]);
    assert_eq!(code(&o), 1, "{}", text(&o));
    assert!(text(&o).contains("no convergence after 1 iterations"));
    assert!(sol.exists() && log.exists(), "best iterate is written");
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 3);
}
