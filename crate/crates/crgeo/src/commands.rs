//! Subcommand bodies. Each returns the text for standard output, or an error
//! carrying its exit code.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crgeo_core::fefferman::{boundary_null_space, cm_boundary_mean_curvature, decomposition_check, CirclePoint, TBoundary};
use crgeo_core::field::Hd;
use crgeo_core::scalar::Scalar;
use crgeo_core::immersions::{levelset_mean_curvature, mean_curvature_vector, Immersion};
use crgeo_core::weierstrass::{generate_surface, Grid, CERTIFICATION_TOL};
use crgeo_core::yamabe::{minimize_q, Discretization, YamabeDomain, YamabeGrid, YamabeRun};
use crgeo_core::{Complex64, Error, HPoint};

use crate::format::{fmt_f64, read_holomap, surface_csv, surface_obj, surface_report, write_atomic, Csv, Field};
use crate::suites::{self, Suite};
use crate::{CliError, Result};

/// Parses `N`, `NxM` or `NxMxK`; every size must be at least 4.
pub fn parse_grid(s: &str, dims: usize) -> Result<Vec<usize>> {
    let parts: std::result::Result<Vec<usize>, _> = s.split('x').map(|p| p.trim().parse::<usize>()).collect();
    let mut v = parts.map_err(|_| CliError::Config(format!("bad grid `{s}`")))?;
    if v.len() == 1 {
        v = vec![v[0]; dims];
    }
    if v.len() != dims {
        return Err(CliError::Config(format!("grid `{s}` needs {dims} sizes")));
    }
    if v.iter().any(|n| *n < 4) {
        return Err(CliError::Config(format!("grid `{s}`: sizes must be at least 4")));
    }
    Ok(v)
}

pub fn check_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::Config(format!("tolerance must be positive, got {tol}")))
    }
}

/// Runs the suites. Returns the table and whether every check passed.
pub fn run_verify(suite: Suite, tol: Option<f64>, seed: u64, report: Option<&Path>) -> Result<(String, bool)> {
    if let Some(t) = tol {
        check_tol(t)?;
    }
    let checks: Vec<_> = suites::run(suite, seed).into_iter().map(|c| c.with_tol(tol)).collect();
    if let Some(p) = report {
        write_atomic(p, suites::json_lines(&checks).as_bytes())?;
    }
    Ok((suites::table(&checks), checks.iter().all(|c| c.pass)))
}

pub fn run_surface(phi: &Path, grid: &str, out: &Path, report: Option<&Path>) -> Result<String> {
    let h = read_holomap(phi)?;
    let g = parse_grid(grid, 2)?;
    let grid = Grid::new(g[0], g[1])?;
    let s = match generate_surface(&h, &grid, CERTIFICATION_TOL) {
        Err(e @ Error::ConstraintsViolated { .. }) => return Err(CliError::Failed(e.to_string())),
        r => r?,
    };
    if h.n == 1 {
        write_atomic(out, surface_obj(&s).as_bytes())?;
    } else {
        surface_csv(&s).write(out)?;
    }
    if let Some(p) = report {
        surface_report(&s).write(p)?;
    }
    let c = &s.certification;
    let mut txt = String::new();
    writeln!(txt, "vertices {} triangles {}", s.points.len(), grid.triangles().len()).unwrap();
    writeln!(txt, "max_isotropy {}", fmt_f64(s.constraints.max_isotropy)).unwrap();
    writeln!(txt, "max_tangency {}", fmt_f64(s.constraints.max_tangency)).unwrap();
    writeln!(txt, "min_nondegeneracy {}", fmt_f64(s.constraints.min_nondegeneracy)).unwrap();
    writeln!(txt, "max_pde_residual {}", fmt_f64(c.max_pde_residual)).unwrap();
    writeln!(txt, "max_conformality {}", fmt_f64(c.max_conformality)).unwrap();
    writeln!(txt, "max_jt_perp {}", fmt_f64(c.max_jt_perp)).unwrap();
    if !c.passes(CERTIFICATION_TOL) {
        return Err(CliError::Failed(format!("{txt}surface residuals exceed {}", fmt_f64(CERTIFICATION_TOL))));
    }
    Ok(txt)
}

/// `cylinder:R`, `plane:BETA`, `halfspace:N` or `nullspace`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    Cylinder(f64),
    Plane(f64),
    HalfSpace(usize),
    NullSpace,
}

impl std::str::FromStr for DomainSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = || arg.parse::<f64>().ok().filter(|v| v.is_finite());
        match kind {
            "cylinder" => num().filter(|r| *r > 0.0).map(DomainSpec::Cylinder).ok_or_else(|| format!("`{s}`: expected cylinder:R with R > 0")),
            "plane" => num().map(DomainSpec::Plane).ok_or_else(|| format!("`{s}`: expected plane:BETA")),
            "halfspace" => arg.parse::<usize>().ok().filter(|n| (1..=4).contains(n)).map(DomainSpec::HalfSpace).ok_or_else(|| format!("`{s}`: expected halfspace:N with 1 ≤ N ≤ 4")),
            "nullspace" if arg.is_empty() => Ok(DomainSpec::NullSpace),
            _ => Err(format!("unknown domain `{s}`")),
        }
    }
}

fn axis(k: usize, n: usize, a: f64, b: f64) -> f64 {
    a + (b - a) * k as f64 / (n - 1) as f64
}

/// Mean curvature field of a `T`-tangent surface in `H₁`, from the level set
/// and, for the cylinder, from its parameterization.
pub fn run_curvature(domain: DomainSpec, grid: &str, tol: f64, out: &Path) -> Result<String> {
    let g = parse_grid(grid, 2)?;
    check_tol(tol)?;
    let mut csv = Csv::new(&["i", "j", "x", "y", "t", "mu", "h_x", "h_y", "h_t", "param_deviation"]);
    let mut worst = 0.0f64;
    let mut mu_range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..g[0] {
        for j in 0..g[1] {
            let t = axis(j, g[1], -1.0, 1.0);
            let (p, ls, dev) = match domain {
                DomainSpec::Cylinder(r) => {
                    let a = TAU * i as f64 / g[0] as f64;
                    let p = HPoint::new(vec![Complex64::from_polar(r, a)], t);
                    let phi = move |x: &[Hd]| x[0] * x[0] + x[1] * x[1] - r * r;
                    let ls = levelset_mean_curvature(&phi, &p)?;
                    let im = Immersion::new(move |u: &[Hd]| vec![u[0].cos() * r, u[0].sin() * r, u[1]], 2, 1)?;
                    let dev = mean_curvature_vector(&im, &[a, t])?.sub(&ls.h).max_abs();
                    (p, ls, dev)
                }
                DomainSpec::Plane(beta) => {
                    let s = axis(i, g[0], -1.0, 1.0);
                    let p = HPoint::new(vec![Complex64::from_polar(s, beta)], t);
                    let (cb, sb) = (beta.cos(), beta.sin());
                    let phi = move |x: &[Hd]| x[1] * cb - x[0] * sb;
                    let ls = levelset_mean_curvature(&phi, &p)?;
                    (p, ls, 0.0)
                }
                _ => return Err(CliError::Config("curvature supports cylinder:R and plane:BETA".into())),
            };
            worst = worst.max(dev);
            mu_range = (mu_range.0.min(ls.mean), mu_range.1.max(ls.mean));
            let c = p.coords();
            csv.row(&[i.into(), j.into(), c[0].into(), c[1].into(), c[2].into(), ls.mean.into(), ls.h.0[0].into(), ls.h.0[1].into(), ls.h.0[2].into(), dev.into()]);
        }
    }
    csv.write(out)?;
    let txt = format!(
        "points {}\nmu_min {}\nmu_max {}\nmax_param_deviation {}\n",
        g[0] * g[1],
        fmt_f64(mu_range.0),
        fmt_f64(mu_range.1),
        fmt_f64(worst)
    );
    if worst > tol {
        return Err(CliError::Failed(format!("{txt}parameterized and level-set curvature differ by more than {}", fmt_f64(tol))));
    }
    Ok(txt)
}

/// Lifted boundary curvature on the circle bundle, or the null space of the
/// induced Fefferman form over `∂H₁⁺`.
pub fn run_fefferman(domain: DomainSpec, grid: &str, tol: f64, out: &Path) -> Result<String> {
    let g = parse_grid(grid, 2)?;
    let (g0, g1) = (g[0], g[1]);
    check_tol(tol)?;
    let total = g[0] * g[1];
    if domain == DomainSpec::NullSpace {
        let mut csv = Csv::new(&["i", "j", "x", "y", "gamma", "dim", "pos", "neg", "zero"]);
        let mut singular = 0;
        for i in 0..g[0] {
            for j in 0..g[1] {
                let (x, y) = (axis(i, g[0], -1.0, 1.0), axis(j, g[1], -1.0, 1.0));
                let gamma = TAU * (i * g[1] + j) as f64 / total as f64;
                let ns = boundary_null_space(&CirclePoint::new(HPoint::new(vec![Complex64::new(x, y)], 0.0), gamma), 1e-8)?;
                singular += usize::from(ns.dim > 0);
                let (p, n, z) = ns.signature;
                csv.row(&[i.into(), j.into(), x.into(), y.into(), gamma.into(), ns.dim.into(), p.into(), n.into(), z.into()]);
            }
        }
        csv.write(out)?;
        return Ok(format!("points {total}\ndegenerate_points {singular}\n"));
    }
    let (model, chart): (TBoundary, Box<dyn Fn(usize, usize) -> Vec<f64>>) = match domain {
        DomainSpec::Cylinder(r) => (TBoundary::Cylinder { r }, Box::new(move |i, j| vec![TAU * i as f64 / g0 as f64, axis(j, g1, -1.0, 1.0)])),
        DomainSpec::HalfSpace(n) => (
            TBoundary::HalfSpace { n },
            Box::new(move |i, j| {
                let mut u = vec![0.25; 2 * n];
                u[0] = axis(i, g0, -1.0, 1.0);
                u[2 * n - 1] = axis(j, g1, -1.0, 1.0);
                u
            }),
        ),
        _ => return Err(CliError::Config("fefferman supports cylinder:R, halfspace:N and nullspace".into())),
    };
    let dim = model.n() * 2;
    let mut header: Vec<String> = vec!["i".into(), "j".into()];
    header.extend((0..dim).map(|k| format!("u{k}")));
    header.extend(["gamma", "norm", "predicted_norm", "max_deviation", "decomposition_defect"].map(String::from));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&refs);
    let (mut dev, mut gap, mut dec) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..g[0] {
        for j in 0..g[1] {
            let u = chart(i, j);
            let gamma = TAU * (i * g[1] + j) as f64 / total as f64;
            let h = cm_boundary_mean_curvature(&model, &u, gamma)?;
            let cp = CirclePoint::new(model.point(&u), gamma);
            let norm = h.norm(&cp);
            let predicted = match model {
                TBoundary::Cylinder { r } => 2.0 / 3.0 / (2.0 * std::f64::consts::SQRT_2 * r),
                TBoundary::HalfSpace { .. } => 0.0,
            };
            let d = decomposition_check(&model, &u, gamma)?;
            let defect = [d.tangent_defect, d.kernel_defect, d.normal_horizontal_defect, d.normal_lift_defect, d.normal_alignment_defect]
                .iter()
                .fold(0.0f64, |m, v| m.max(*v));
            dev = dev.max(h.max_deviation);
            gap = gap.max((norm - predicted).abs());
            dec = dec.max(defect);
            let mut row: Vec<Field> = vec![i.into(), j.into()];
            row.extend(u.iter().map(|v| Field::F(*v)));
            row.extend([gamma, norm, predicted, h.max_deviation, defect].map(Field::F));
            csv.row(&row);
        }
    }
    csv.write(out)?;
    let txt = format!(
        "points {total}\nmax_deviation {}\nmax_norm_gap {}\nmax_decomposition_defect {}\n",
        fmt_f64(dev),
        fmt_f64(gap),
        fmt_f64(dec)
    );
    if dev.max(gap) > tol {
        return Err(CliError::Failed(format!("{txt}lifted curvature checks exceed {}", fmt_f64(tol))));
    }
    Ok(txt)
}

#[derive(Clone, Debug)]
pub struct YamabeConfig {
    pub r0: f64,
    pub r1: f64,
    pub length: f64,
    pub grids: Vec<[usize; 3]>,
    pub tol: f64,
    pub max_iters: usize,
    pub out: PathBuf,
    pub log: PathBuf,
    pub report: Option<PathBuf>,
}

/// `dir/stem.tag.ext`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(e) => format!("{stem}.{tag}.{}", e.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

pub fn solution_csv(disc: &Discretization, run: &YamabeRun) -> Csv {
    let g = disc.grid;
    let mut csv = Csv::new(&["irho", "ialpha", "it", "rho", "alpha", "t", "u"]);
    for i in 0..=g.nr {
        for j in 0..g.na {
            for l in 0..g.nt {
                csv.row(&[
                    i.into(),
                    j.into(),
                    l.into(),
                    disc.rho[i].into(),
                    (disc.da * j as f64).into(),
                    (disc.dt * l as f64).into(),
                    run.u.get(i, j, l).into(),
                ]);
            }
        }
    }
    csv
}

pub fn convergence_csv(run: &YamabeRun) -> Csv {
    let mut csv = Csv::new(&["iter", "Q", "A", "B", "step", "grad_norm", "max_el_residual"]);
    for r in &run.log {
        csv.row(&[r.iter.into(), r.q.into(), r.a.into(), r.b.into(), r.step.into(), r.grad_norm.into(), r.max_el_residual.into()]);
    }
    csv
}

pub fn run_yamabe(cfg: &YamabeConfig) -> Result<String> {
    check_tol(cfg.tol)?;
    let domain = YamabeDomain::new(cfg.r0, cfg.r1, cfg.length)?;
    if cfg.grids.is_empty() {
        return Err(CliError::Config("no grid given".into()));
    }
    let mut report = Csv::new(&[
        "nrho", "nalpha", "nt", "h", "Q", "lambda", "max_el_residual", "max_el_residual_lambda_q", "green_defect", "iterations", "converged",
    ]);
    let mut txt = String::new();
    let mut failure = None;
    let multi = cfg.grids.len() > 1;
    let mut residuals = Vec::new();
    for &[nr, na, nt] in &cfg.grids {
        let grid = YamabeGrid::new(nr, na, nt)?;
        let disc = Discretization::new(domain, grid)?;
        let run = minimize_q(&domain, grid, cfg.tol, cfg.max_iters)?;
        let tag = format!("{nr}x{na}x{nt}");
        let (out, log) = if multi { (tagged(&cfg.out, &tag), tagged(&cfg.log, &tag)) } else { (cfg.out.clone(), cfg.log.clone()) };
        solution_csv(&disc, &run).write(&out)?;
        convergence_csv(&run).write(&log)?;
        let green = disc.green_defect(&run.u)?;
        let (res, res_q) = (run.residual.max(), run.residual_constrained.max());
        residuals.push((disc.h, res, res_q));
        report.row(&[
            nr.into(),
            na.into(),
            nt.into(),
            disc.h.into(),
            run.q.into(),
            run.lambda.into(),
            res.into(),
            res_q.into(),
            green.into(),
            run.iterations.into(),
            run.converged.into(),
        ]);
        writeln!(txt, "grid {tag}").unwrap();
        writeln!(txt, "  Q* {}", fmt_f64(run.q)).unwrap();
        writeln!(txt, "  lambda* = (p/2)Q* {}", fmt_f64(run.lambda)).unwrap();
        writeln!(txt, "  max EL residual at lambda* {}", fmt_f64(res)).unwrap();
        writeln!(txt, "  max EL residual at lambda = Q* {}", fmt_f64(res_q)).unwrap();
        writeln!(txt, "  green defect {}", fmt_f64(green)).unwrap();
        writeln!(txt, "  iterations {} gradient {} converged {}", run.iterations, fmt_f64(run.grad_norm), run.converged).unwrap();
        if let Err(e) = run.status() {
            failure.get_or_insert(e);
        }
    }
    for w in residuals.windows(2) {
        let rate = |a: f64, b: f64| (a / b).ln() / (w[0].0 / w[1].0).ln();
        writeln!(txt, "order h {} -> {}: lambda* {:.3}, lambda = Q* {:.3}", fmt_f64(w[0].0), fmt_f64(w[1].0), rate(w[0].1, w[1].1), rate(w[0].2, w[1].2)).unwrap();
    }
    if let Some(p) = &cfg.report {
        report.write(p)?;
    }
    match failure {
        Some(e) => Err(CliError::Failed(format!("{txt}{e}"))),
        None => Ok(txt),
    }
}
