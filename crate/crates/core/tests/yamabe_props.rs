mod common;

use common::*;
use crgeo_core::diffops::sublaplacian;
use crgeo_core::field::Hd;
use crgeo_core::scalar::Scalar;
use crgeo_core::yamabe::*;
use crgeo_core::{Complex64, Error, HPoint};
use proptest::prelude::*;
use std::f64::consts::{PI, SQRT_2, TAU};

fn domain() -> YamabeDomain {
    YamabeDomain::new(0.5, 1.0, 1.0).unwrap()
}

fn disc(nr: usize, na: usize, nt: usize) -> Discretization {
    Discretization::new(domain(), YamabeGrid::new(nr, na, nt).unwrap()).unwrap()
}

/// Smooth positive test function, periodic in `t` with period 1.
fn smooth<S: Scalar>(x: &[S]) -> S {
    let (a, b, t) = (x[0], x[1], x[2]);
    let s = (t * S::cst(TAU)).sin();
    let c = (t * S::cst(TAU)).cos();
    S::cst(2.0) + a * S::cst(0.3) + b * b * S::cst(0.2) + a * b * s * S::cst(0.25) + b * c * S::cst(0.15)
}

fn smooth_cyl(r: f64, a: f64, t: f64) -> f64 {
    smooth(&[r * a.cos(), r * a.sin(), t])
}

fn order(e: &[f64]) -> f64 {
    (e[e.len() - 2] / e[e.len() - 1]).log2()
}

fn random_positive(d: &Discretization, v: &[f64]) -> GridFunction {
    let mut u = GridFunction::constant(d.grid, 1.0);
    for (k, x) in u.u.iter_mut().enumerate() {
        *x = (0.5 * v[k % v.len()] + 0.1 * ((k * 7919) % 13) as f64 / 13.0).exp();
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_gradient_matches_difference_quotient(v in vec_of(37, 1.0), hv in vec_of(41, 1.0)) {
        let d = disc(5, 4, 3);
        let u = random_positive(&d, &v);
        let h: Vec<f64> = (0..u.u.len()).map(|k| hv[k % hv.len()] * (1.0 + (k % 3) as f64)).collect();
        let (_, ga, gb) = d.gradients(&u).unwrap();
        let eps = 1e-6;
        let shifted = |s: f64| {
            let w = GridFunction { grid: d.grid, u: u.u.iter().zip(&h).map(|(a, b)| a + s * b).collect() };
            d.functionals(&w).unwrap()
        };
        let (fp, fm) = (shifted(eps), shifted(-eps));
        let da = (fp.a - fm.a) / (2.0 * eps);
        let db = (fp.b - fm.b) / (2.0 * eps);
        let ea: f64 = ga.iter().zip(&h).map(|(a, b)| a * b).sum();
        let eb: f64 = gb.iter().zip(&h).map(|(a, b)| a * b).sum();
        prop_assert!((da - ea).abs() <= 1e-6 * (1.0 + ea.abs()), "A {} vs {}", da, ea);
        prop_assert!((db - eb).abs() <= 1e-6 * (1.0 + eb.abs()), "B {} vs {}", db, eb);
    }

    #[test]
    fn homogeneity(v in vec_of(19, 1.0), c in 0.2f64..5.0) {
        let d = disc(4, 4, 4);
        let u = random_positive(&d, &v);
        let f = d.functionals(&u).unwrap();
        let g = d.functionals(&u.scale(c)).unwrap();
        prop_assert!((g.a - c * c * f.a).abs() <= 1e-12 * c * c * (1.0 + f.a.abs()));
        prop_assert!((g.b - c.powi(4) * f.b).abs() <= 1e-12 * c.powi(4) * f.b);
        prop_assert!((g.q - f.q / (c * c)).abs() <= 1e-12 * (1.0 + f.q.abs()) / (c * c));
    }

    #[test]
    fn omega_density_matches_volume_oracle(p in hpoint(1, 2.0)) {
        let rho = p.z[0].norm();
        prop_assert!((omega_density(&p) - 2.0 * volume_density(&p)).abs() <= 1e-12);
        prop_assert!((omega_density(&p) - 4.0).abs() <= 1e-12 * (1.0 + rho));
    }

    #[test]
    fn mu_is_constant_on_each_component(alpha in 0.0f64..TAU, r0 in 0.1f64..1.0, gap in 0.1f64..2.0) {
        let d = YamabeDomain::new(r0, r0 + gap, 1.0).unwrap();
        for comp in [Component::Inner, Component::Outer] {
            let r = d.radius(comp);
            let m = mu_theta_at(&d, comp, alpha).unwrap();
            prop_assert!((m - mu_theta(&d, comp).unwrap()).abs() <= 1e-12);
            let expected = match comp { Component::Inner => 1.0, Component::Outer => -1.0 } / (2.0 * SQRT_2 * r);
            prop_assert!((m - expected).abs() <= 1e-10);
        }
        prop_assert!((boundary_density(r0, alpha).unwrap() - SQRT_2 * r0).abs() <= 1e-12);
    }

    #[test]
    fn gradient_flow_preserves_symmetry(r0 in 0.2f64..0.8, gap in 0.2f64..1.0) {
        let dom = YamabeDomain::new(r0, r0 + gap, 1.0).unwrap();
        let run = minimize_q(&dom, YamabeGrid::new(8, 5, 4).unwrap(), 1e-9, 2000).unwrap();
        prop_assert!(run.converged);
        let g = run.u.grid;
        let mut dev = 0.0f64;
        for i in 0..=g.nr {
            let base = run.u.get(i, 0, 0);
            for j in 0..g.na {
                for l in 0..g.nt {
                    dev = dev.max((run.u.get(i, j, l) - base).abs());
                }
            }
        }
        prop_assert!(dev <= 1e-9, "deviation {}", dev);
    }
}

#[test]
fn constant_identity_is_exact() {
    for n in 1..=6 {
        assert!(YamabeConstants::ratio_identity_exact(n), "n = {n}");
        let k = YamabeConstants::new(n);
        let nf = n as f64;
        assert!((k.robin() - 2.0 * nf * nf / (2.0 * nf + 1.0)).abs() <= 1e-12 * k.robin());
        assert_eq!(k.p, k.b);
    }
    let (a, b) = YamabeConstants::a_exact(1);
    assert_eq!((a, b), (16, 3));
    assert_eq!(YamabeConstants::c_exact(1), 2);
}

#[test]
fn unit_function_values() {
    let d = disc(16, 8, 8);
    let dom = domain();
    let u = GridFunction::constant(d.grid, 1.0);
    let f = d.functionals(&u).unwrap();
    let mu0 = mu_theta(&dom, Component::Inner).unwrap();
    let mu1 = mu_theta(&dom, Component::Outer).unwrap();
    let area = |r: f64| SQRT_2 * r * TAU * dom.length;
    let a = -(16.0 / 3.0) * (mu0 * area(dom.r0) + mu1 * area(dom.r1));
    // μr is constant across components, so the two boundary terms cancel
    assert!((f.a - a).abs() <= 1e-12 && a.abs() <= 1e-12);
    let vol = 2.0 * (dom.r1 * dom.r1 - dom.r0 * dom.r0) * TAU * dom.length;
    assert!((f.b - vol).abs() <= 1e-12 * vol);
    assert!((d.volume() - vol).abs() <= 1e-12 * vol);
    let r = d.el_residual(&u, 0.0).unwrap();
    assert!(r.max_interior() <= 1e-12);
    let g = d.grid;
    for j in 0..g.na {
        for l in 0..g.nt {
            assert!((r.boundary[j * g.nt + l] + (2.0 / 3.0) * mu0).abs() <= 1e-12);
            assert!((r.boundary[g.na * g.nt + j * g.nt + l] + (2.0 / 3.0) * mu1).abs() <= 1e-12);
        }
    }
}

#[test]
fn mu_vanishes_in_the_flat_limit() {
    let mut last = f64::INFINITY;
    for r in [1.0, 10.0, 100.0, 1e4] {
        let d = YamabeDomain::new(0.5 * r, r, 1.0).unwrap();
        let m = mu_theta(&d, Component::Outer).unwrap().abs();
        assert!(m < last);
        last = m;
    }
    assert!(last < 1e-4);
}

#[test]
fn grid_stencil_matches_sublaplacian() {
    let mut errs = Vec::new();
    for n in [8, 16, 32] {
        let d = disc(n, 4 * n, 4 * n);
        let u = d.sample(smooth_cyl);
        let mut e = 0.0f64;
        let mut eg = 0.0f64;
        let g = d.grid;
        for i in [0, n / 2, n] {
            for j in [0, g.na / 3] {
                for l in [0, g.nt / 5] {
                    let (r, a, t) = (d.rho[i], d.da * j as f64, d.dt * l as f64);
                    let p = HPoint::new(vec![Complex64::from_polar(r, a)], t);
                    let exact = sublaplacian(&|x: &[Hd]| smooth(x), &p);
                    e = e.max((d.sublaplacian(&u, i, j, l) - exact).abs());
                    if i == n {
                        let xi = d.normal_derivative(&u, Component::Outer, j, l);
                        let ur = {
                            let k = 1e-6;
                            (smooth_cyl(r + k, a, t) - smooth_cyl(r - k, a, t)) / (2.0 * k)
                        };
                        eg = eg.max((xi - ur / SQRT_2).abs());
                    }
                }
            }
        }
        errs.push(e.max(eg));
    }
    assert!(order(&errs) >= 1.8, "{errs:?}");
    assert!(errs[2] <= 1e-2);
}

#[test]
fn green_defect_is_second_order() {
    let mut errs = Vec::new();
    for n in [8, 16, 32] {
        let d = disc(n, n, n);
        errs.push(d.green_defect(&d.sample(smooth_cyl)).unwrap().abs());
    }
    assert!(order(&errs[..2]) >= 1.8 && order(&errs) >= 1.8, "{errs:?}");
}

#[test]
fn quotient_decreases_monotonically() {
    let d = disc(8, 6, 4);
    let mut v = GridFunction::constant(d.grid, 1.0);
    for (k, x) in v.u.iter_mut().enumerate() {
        *x = 1.0 + 0.3 * ((k as f64) * 0.7).sin();
    }
    let run = minimize_q_from(&d, v, 1e-9, 3000).unwrap();
    assert!(run.converged);
    for w in run.log.windows(2) {
        assert!(w[1].q <= w[0].q + 1e-12, "{} -> {}", w[0].q, w[1].q);
        assert!((w[1].b - 1.0).abs() <= 1e-12);
    }
    let sym = minimize_q(&domain(), d.grid, 1e-9, 3000).unwrap();
    assert!((run.q - sym.q).abs() <= 1e-8, "{} vs {}", run.q, sym.q);
}

#[test]
fn radial_oracle_agrees_with_grid_minimizer() {
    let o = radial_oracle(&domain(), 4000).unwrap();
    let fine = radial_oracle(&domain(), 8000).unwrap();
    assert!((o.q - fine.q).abs() <= 1e-10);
    assert!(o.q < 0.0 && o.u.iter().all(|v| *v > 0.0));
    let mut errs = Vec::new();
    for n in [8, 16, 32] {
        let run = minimize_q(&domain(), YamabeGrid::new(n, 8, 8).unwrap(), 1e-10, 4000).unwrap();
        run.status().unwrap();
        errs.push((run.q - o.q).abs());
    }
    assert!(order(&errs) >= 1.8, "{errs:?}");
    assert!(errs[2] <= 1e-3);
}

#[test]
fn residual_order_depends_on_the_multiplier() {
    let mut constrained = Vec::new();
    let mut stated = Vec::new();
    for n in [8, 16, 32] {
        let run = minimize_q(&domain(), YamabeGrid::new(n, 8, 8).unwrap(), 1e-10, 4000).unwrap();
        assert!(run.converged);
        assert_eq!(run.lambda, 2.0 * run.q);
        constrained.push(run.residual_constrained.max());
        stated.push(run.residual.max());
    }
    assert!(order(&constrained[..2]) >= 1.8 && order(&constrained) >= 1.8, "{constrained:?}");
    // with λ = (p/2)Q the interior residual is −Q u³ at the discrete critical point
    assert!(stated.iter().all(|r| *r > 0.1), "{stated:?}");
}

#[test]
fn iteration_cap_reports_not_converged() {
    let run = minimize_q(&domain(), YamabeGrid::new(8, 4, 4).unwrap(), 1e-10, 1).unwrap();
    assert!(!run.converged);
    assert_eq!(run.log.len(), 2);
    assert!(matches!(run.status(), Err(Error::NotConverged { iterations: 1, .. })));
    assert!(run.u.u.iter().all(|v| *v > 0.0));
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(matches!(YamabeDomain::new(1.0, 1.0, 1.0), Err(Error::InvalidDomain(_))));
    assert_eq!(YamabeGrid::new(8, 2, 8), Err(Error::EmptyGrid));
    let d = disc(4, 4, 4);
    let wrong = GridFunction::constant(YamabeGrid::new(5, 4, 4).unwrap(), 1.0);
    assert!(d.functionals(&wrong).is_err());
    let _ = PI;
}
