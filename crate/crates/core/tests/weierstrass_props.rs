mod common;

use common::*;
use crgeo_core::heis::TangentVector;
use crgeo_core::immersions::{minimality_residual, surface_char_decomposition};
use crgeo_core::weierstrass::*;
use crgeo_core::{Complex64, Constraint, Error};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(coeffs: &[f64]) -> Poly {
    Poly(coeffs.chunks(2).map(|p| c(p[0], p[1])).collect())
}

/// Vertical plane over the direction `e^{iβ}`, reparameterized by a
/// holomorphic `G`: `Ψ = (e^{iβ} Re G, √2 Im G)`.
fn vertical_family(g_prime: Poly, beta: f64) -> HoloMap {
    let mut h = HoloMap::zero(1);
    let half = g_prime.scale(c(0.5, 0.0));
    h.comps[0] = half.scale(c(beta.cos(), 0.0));
    h.comps[1] = half.scale(c(beta.sin(), 0.0));
    h.comps[2] = g_prime.scale(c(0.0, -FRAC_1_SQRT_2));
    h
}

/// Totally real plane `Ψ = (Re G, Im G, 0, 0, 0)` in `H₂`, which is Legendrian.
fn legendrian_family(g_prime: Poly) -> HoloMap {
    let mut h = HoloMap::zero(2);
    h.comps[0] = g_prime.scale(c(0.5, 0.0));
    h.comps[1] = g_prime.scale(c(0.0, -0.5));
    h
}

fn quad_psi(h: &HoloMap, z: Complex64) -> Vec<f64> {
    // composite Simpson along o → (o.re, y₀) → (z.re, y₀) → z
    let y0 = h.domain.y0;
    let legs = [(h.base, c(h.base.re, y0)), (c(h.base.re, y0), c(z.re, y0)), (c(z.re, y0), z)];
    let steps = 3334;
    let mut acc = vec![c(0.0, 0.0); h.comps.len()];
    for (a, b) in legs {
        let d = (b - a) / steps as f64;
        for k in 0..steps {
            let z0 = a + d * k as f64;
            let f = |w: Complex64| h.phi(w);
            let (p0, pm, p1) = (f(z0), f(z0 + d * 0.5), f(z0 + d));
            for i in 0..acc.len() {
                acc[i] += (p0[i] + pm[i] * 4.0 + p1[i]) * d / 6.0;
            }
        }
    }
    acc.iter().map(|v| 2.0 * v.re).collect()
}

fn g_prime() -> impl Strategy<Value = Poly> {
    // G' = 1 + small higher terms keeps G' away from zero on [−1, 1]²
    vec_of(6, 0.15).prop_map(|v| {
        let mut p = poly(&v);
        p.0[0] += c(1.0, 0.0);
        p
    })
}

fn assert_certified(h: &HoloMap, grid: &Grid) -> Result<(), TestCaseError> {
    let cr = constraint_residuals(h, grid);
    prop_assert!(cr.max_isotropy <= 1e-12, "isotropy {}", cr.max_isotropy);
    prop_assert!(cr.max_tangency <= 1e-12, "tangency {}", cr.max_tangency);
    prop_assert!(cr.min_nondegeneracy > 1e-3);
    let s = generate_surface(h, grid, CERTIFICATION_TOL).unwrap();
    let cert = &s.certification;
    prop_assert!(cert.max_pde_residual <= 1e-10, "pde {}", cert.max_pde_residual);
    prop_assert!(cert.max_conformality <= 1e-10);
    prop_assert!(cert.max_jt_perp <= 1e-8);
    prop_assert!(cert.max_phi_mismatch <= 1e-12, "Φ mismatch {}", cert.max_phi_mismatch);
    prop_assert!(cert.max_antiholomorphic <= 1e-10);
    prop_assert!(cert.passes(CERTIFICATION_TOL));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn vertical_families_are_certified(gp in g_prime(), beta in 0.0f64..6.28) {
        assert_certified(&vertical_family(gp, beta), &Grid::new(9, 9).unwrap())?;
    }

    #[test]
    fn legendrian_families_are_certified(gp in g_prime(), beta in 0.0f64..6.28, j in 0usize..2) {
        assert_certified(&legendrian_family(gp).rotate(j, beta), &Grid::new(9, 9).unwrap())?;
    }

    #[test]
    fn rotations_preserve_constraints(d in vec_of(30, 1.0), beta in 0.0f64..6.28, z in (-1.0f64..1.0, -1.0f64..1.0)) {
        let mut h = HoloMap::zero(2);
        for (i, chunk) in d.chunks(6).enumerate() {
            h.comps[i] = poly(chunk);
        }
        let z = c(z.0, z.1);
        for j in 0..2 {
            let r = h.rotate(j, beta);
            let (a, b) = (point_constraints(&h, z), point_constraints(&r, z));
            prop_assert!((a.isotropy - b.isotropy).norm() <= 1e-10 * (1.0 + a.isotropy.norm()));
            prop_assert!((a.nondegeneracy - b.nondegeneracy).abs() <= 1e-10 * (1.0 + a.nondegeneracy));
            prop_assert!((a.tangency - b.tangency).abs() <= 1e-10 * (1.0 + a.tangency));
            prop_assert!((compute_k(&h, z) - compute_k(&r, z)).norm() <= 1e-10 * (1.0 + compute_k(&h, z).norm()));
        }
    }

    #[test]
    fn k_matches_chart_k(d in vec_of(18, 1.0), base in (-1.0f64..1.0, -1.0f64..1.0), z in (-1.0f64..1.0, -1.0f64..1.0)) {
        let mut h = HoloMap::zero(1);
        for (i, chunk) in d.chunks(6).enumerate() {
            h.comps[i] = poly(chunk);
        }
        h.base = c(base.0, base.1);
        let z = c(z.0, z.1);
        let jet = h.chart().jet(z);
        let k = compute_k(&h, z);
        prop_assert!((jet.k - k).norm() <= 1e-10 * (1.0 + k.norm()));
        // nondegeneracy is the conformal factor E
        prop_assert!((point_constraints(&h, z).nondegeneracy - jet.e).abs() <= 1e-10 * (1.0 + jet.e));
        prop_assert_eq!(integrate_data(&h, h.base).coords(), vec![0.0; 3]);
    }

    #[test]
    fn antiderivative_is_path_independent(d in vec_of(24, 1.0), z in (-1.0f64..1.0, -1.0f64..1.0)) {
        let mut h = HoloMap::zero(1);
        for (i, chunk) in d.chunks(8).enumerate() {
            h.comps[i] = poly(chunk);
        }
        h.base = c(0.3, 0.2);
        let z = c(z.0, z.1);
        let exact = integrate_data(&h, z).coords();
        let quad = quad_psi(&h, z);
        prop_assert!(max_abs(&exact.iter().zip(&quad).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-8);
    }

    #[test]
    fn certified_surfaces_are_minimal(gp in g_prime(), beta in 0.0f64..6.28, z in (-1.0f64..1.0, -1.0f64..1.0)) {
        let h = legendrian_family(gp).rotate(1, beta);
        let chart = h.chart();
        let u = [z.0, z.1];
        prop_assert!(minimality_residual(&chart.immersion(), &u).unwrap().max_abs() <= 1e-9);
        // Legendrian: T is normal
        let dec = surface_char_decomposition(&chart, c(z.0, z.1)).unwrap();
        prop_assert!(dec.normal.sub(&TangentVector::basis(2, 4)).max_abs() <= 1e-10);
    }
}

#[test]
fn vertical_plane_round_trip() {
    let h = HoloMap::vertical_plane();
    let grid = Grid::new(64, 64).unwrap();
    let cr = constraint_residuals(&h, &grid);
    assert!(cr.max_isotropy <= 1e-12 && cr.max_tangency <= 1e-12);
    assert!((cr.min_nondegeneracy - 1.0).abs() <= 1e-12);
    let s = generate_surface(&h, &grid, CERTIFICATION_TOL).unwrap();
    assert!(s.certification.max_pde_residual <= 1e-10);
    assert_eq!(s.points.len(), 64 * 64);
    for (p, z) in s.points.iter().zip(&s.params) {
        assert!((p[0] - z.re).abs() < 1e-15 && p[1] == 0.0 && (p[2] - SQRT_2 * z.im).abs() < 1e-15);
    }
    assert_eq!(grid.triangles().len(), 2 * 63 * 63);
}

#[test]
fn broken_data_names_the_constraint() {
    let mut h = HoloMap::vertical_plane();
    h.comps[2] = Poly::constant(c(0.0, -1.0));
    let g = Grid::new(8, 8).unwrap();
    assert!(matches!(generate_surface(&h, &g, 1e-8), Err(Error::ConstraintsViolated { constraint: Constraint::Isotropy, .. })));
    // isotropic and nondegenerate, but T is not tangent along F²
    let mut h = HoloMap::zero(2);
    h.comps[0] = Poly::constant(c(0.5, 0.0));
    h.comps[1] = Poly::constant(c(0.0, 0.3));
    h.comps[4] = Poly::constant(c(0.0, 0.32f64.sqrt()));
    let cr = constraint_residuals(&h, &g);
    assert!(cr.max_isotropy < 1e-15 && (cr.min_nondegeneracy - 1.0).abs() < 1e-12);
    let e = generate_surface(&h, &g, 1e-8).unwrap_err();
    assert!(matches!(e, Error::ConstraintsViolated { constraint: Constraint::Tangency, .. }), "{e:?}");
    assert_eq!(
        generate_surface(&HoloMap::zero(1), &g, 1e-8).unwrap_err(),
        Error::ConstraintsViolated { constraint: Constraint::Nondegeneracy, value: 0.0 }
    );
}

#[test]
fn rotated_vertical_plane_passes() {
    let g = Grid::new(8, 8).unwrap();
    for k in 0..12 {
        let h = HoloMap::vertical_plane().rotate(0, k as f64 * 0.5);
        assert!(constraint_residuals(&h, &g).pass(1e-12), "β = {}", k as f64 * 0.5);
    }
}
