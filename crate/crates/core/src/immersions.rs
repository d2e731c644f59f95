//! Immersions into `(Hₙ, g₀)`.
//!
//! An immersion is a map from an `m`-dimensional parameter patch into
//! `R^{2n+1}` evaluated on hyper-dual inputs, so first and second partials of
//! `Ψ^A` are exact. The mean curvature vector is computed from the Gauss
//! formula and, separately, from the Laplace–Beltrami operator of the pullback
//! metric; the two must agree.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::diffops::{frame_compose, levi_civita_christoffels};
use crate::error::{Error, Result};
use crate::field::{gradient, map_directional, map_jet, Hd, MapJet, ScalarField, VectorMap};
use crate::heis::{apply_j, real_frame, webster_metric, webster_metric_coords, FrameKind, HPoint, TangentVector};
use crate::linalg::{dot, Mat};

/// Default lower bound for `|Xφ|` in [`levelset_mean_curvature`].
pub const CHARACTERISTIC_THRESHOLD: f64 = 1e-6;

/// `Ψ : U ⊂ R^m → Hₙ`.
#[derive(Clone, Debug)]
pub struct Immersion<F> {
    pub map: F,
    pub m: usize,
    pub n: usize,
}

impl<F: VectorMap> Immersion<F> {
    pub fn new(map: F, m: usize, n: usize) -> Result<Self> {
        if m == 0 || m > 2 * n + 1 {
            return Err(Error::InvalidDomain("parameter dimension must lie in 1..=2n+1"));
        }
        Ok(Self { map, m, n })
    }
}

/// Everything at one parameter point.
struct PointData {
    x: Vec<f64>,
    p: HPoint,
    jet: MapJet,
    g: Mat,
    pull: Mat,
    pull_inv: Mat,
}

impl PointData {
    fn new<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<Self> {
        if u.len() != im.m {
            return Err(Error::DimensionMismatch { expected: im.m, found: u.len() });
        }
        let jet = map_jet(&im.map, u);
        let d = 2 * im.n + 1;
        if jet.value.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: jet.value.len() });
        }
        let x = jet.value.clone();
        let p = HPoint::from_coords(&x);
        let g = webster_metric(&p);
        let pull = Mat::from_fn(im.m, im.m, |a, b| g.bilinear(&jet.d1[a], &jet.d1[b]));
        let (vals, _) = pull.symmetric_eigen();
        let top = vals.last().copied().unwrap_or(0.0);
        if !(vals[0] > 1e-12 * top) {
            return Err(Error::NotImmersion { rank: pull.rank(1e-10), dim: im.m });
        }
        let pull_inv = pull.inverse().ok_or(Error::NotImmersion { rank: pull.rank(1e-10), dim: im.m })?;
        Ok(Self { x, p, jet, g, pull, pull_inv })
    }

    fn m(&self) -> usize {
        self.pull.rows
    }

    /// Tangential part `Σ B_α G^{αβ} g(B_β, v)`.
    fn tangential(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m();
        let coef: Vec<f64> = (0..m).map(|b| self.g.bilinear(&self.jet.d1[b], v)).collect();
        let mut out = vec![0.0; v.len()];
        for a in 0..m {
            let w: f64 = (0..m).map(|b| self.pull_inv[(a, b)] * coef[b]).sum();
            for (o, ba) in out.iter_mut().zip(&self.jet.d1[a]) {
                *o += w * ba;
            }
        }
        out
    }

    /// `G^{αβ} Γ^C_{AB} B^A_α B^B_β` with the ambient Levi-Civita coefficients.
    fn ambient_trace(&self) -> Vec<f64> {
        let gam = levi_civita_christoffels(&self.p);
        let m = self.m();
        let mut out = vec![0.0; self.x.len()];
        for a in 0..m {
            for b in 0..m {
                let w = self.pull_inv[(a, b)];
                let c = gam.contract(&self.jet.d1[a], &self.jet.d1[b]);
                for (o, ci) in out.iter_mut().zip(c) {
                    *o += w * ci;
                }
            }
        }
        out
    }

    /// Christoffels `γ^δ_{αβ}` of the pullback metric, from
    /// `∂_γ G_{αβ} = g(Ψ_{γα}, B_β) + g(B_α, Ψ_{γβ}) + (B_γ g)(B_α, B_β)`.
    fn pullback_christoffels(&self) -> Vec<f64> {
        let m = self.m();
        let d = self.x.len();
        let metric = |y: &[Hd]| webster_metric_coords(y);
        let dg: Vec<Mat> = (0..m)
            .map(|c| Mat { rows: d, cols: d, data: map_directional(&metric, &self.x, &self.jet.d1[c]).1 })
            .collect();
        let b = &self.jet.d1;
        let h = &self.jet.d2;
        let dpull = |c: usize, a: usize, bb: usize| {
            self.g.bilinear(&h[c][a], &b[bb]) + self.g.bilinear(&b[a], &h[c][bb]) + dg[c].bilinear(&b[a], &b[bb])
        };
        let mut out = vec![0.0; m * m * m];
        for dl in 0..m {
            for a in 0..m {
                for bb in 0..m {
                    let mut s = 0.0;
                    for e in 0..m {
                        s += self.pull_inv[(dl, e)] * (dpull(a, e, bb) + dpull(bb, e, a) - dpull(e, a, bb));
                    }
                    out[(dl * m + a) * m + bb] = 0.5 * s;
                }
            }
        }
        out
    }
}

/// `(Ψ*g₀)_{αβ} = B^A_α B^B_β g_{AB}`.
pub fn pullback_metric<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<Mat> {
    Ok(PointData::new(im, u)?.pull)
}

/// Push-forwards `Ψ_*∂_α`.
pub fn tangent_vectors<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Vec<TangentVector> {
    map_jet(&im.map, u).d1.into_iter().map(TangentVector).collect()
}

/// `H = (1/m) G^{αβ} (D⁰_{∂_α}Ψ_*∂_β)^⊥` from the Gauss formula.
pub fn mean_curvature_vector<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<TangentVector> {
    let pd = PointData::new(im, u)?;
    let gam = levi_civita_christoffels(&pd.p);
    let m = pd.m();
    let mut out = vec![0.0; pd.x.len()];
    for a in 0..m {
        for b in 0..m {
            let mut v = pd.jet.d2[a][b].clone();
            for (vi, ci) in v.iter_mut().zip(gam.contract(&pd.jet.d1[a], &pd.jet.d1[b])) {
                *vi += ci;
            }
            let tan = pd.tangential(&v);
            let w = pd.pull_inv[(a, b)] / m as f64;
            for c in 0..v.len() {
                out[c] += w * (v[c] - tan[c]);
            }
        }
    }
    Ok(TangentVector(out))
}

/// Componentwise Laplace–Beltrami `ΔΨ^A` of the pullback metric.
pub fn map_laplacian<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<TangentVector> {
    let pd = PointData::new(im, u)?;
    Ok(TangentVector(laplacian_of(&pd)))
}

fn laplacian_of(pd: &PointData) -> Vec<f64> {
    let m = pd.m();
    let gam = pd.pullback_christoffels();
    let mut out = vec![0.0; pd.x.len()];
    for a in 0..m {
        for b in 0..m {
            let w = pd.pull_inv[(a, b)];
            for c in 0..out.len() {
                let mut v = pd.jet.d2[a][b][c];
                for dl in 0..m {
                    v -= gam[(dl * m + a) * m + b] * pd.jet.d1[dl][c];
                }
                out[c] += w * v;
            }
        }
    }
    out
}

/// `H` from `m H = ΔΨ + Σ_α D⁰_{E_α}E_α`, independent of the normal projection.
pub fn mean_curvature_rearranged<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<TangentVector> {
    let pd = PointData::new(im, u)?;
    let lap = laplacian_of(&pd);
    let tr = pd.ambient_trace();
    let m = pd.m() as f64;
    Ok(TangentVector(lap.iter().zip(tr).map(|(a, b)| (a + b) / m).collect()))
}

/// Normal component `T^⊥` of the characteristic direction at `Ψ(u)`.
pub fn t_normal<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<TangentVector> {
    let pd = PointData::new(im, u)?;
    let t = TangentVector::basis(im.n, 2 * im.n);
    let tan = pd.tangential(&t.0);
    Ok(t.sub(&TangentVector(tan)))
}

/// `ΔΨ − 2JT^⊥`; vanishes exactly when `Ψ` is minimal.
pub fn minimality_residual<F: VectorMap>(im: &Immersion<F>, u: &[f64]) -> Result<TangentVector> {
    let pd = PointData::new(im, u)?;
    let lap = TangentVector(laplacian_of(&pd));
    let t = TangentVector::basis(im.n, 2 * im.n);
    let tperp = t.sub(&TangentVector(pd.tangential(&t.0)));
    Ok(lap.sub(&apply_j(&pd.p, &tperp).scale(2.0)))
}

/// X-mean curvature of a level set `{φ = 0}` in `H₁` tangent to `T`.
#[derive(Clone, Debug)]
pub struct LevelSetCurvature {
    /// `H = mean · ξ`.
    pub h: TangentVector,
    pub mean: f64,
    pub e: TangentVector,
    pub xi: TangentVector,
}

/// `H = −½ Σ_j X_j(X_jφ/|Xφ|) ξ` with `ξ = Xφ/|Xφ|` and
/// `E = ((X₂φ)X₁ − (X₁φ)X₂)/|Xφ|`, where `X₁ = X`, `X₂ = Y`.
pub fn levelset_mean_curvature<F: ScalarField + ?Sized>(phi: &F, p: &HPoint) -> Result<LevelSetCurvature> {
    levelset_mean_curvature_with(phi, p, 1.0, CHARACTERISTIC_THRESHOLD)
}

/// As [`levelset_mean_curvature`] with `X₂ = s·Y` for `s = ±1` and a custom
/// characteristic threshold.
pub fn levelset_mean_curvature_with<F: ScalarField + ?Sized>(
    phi: &F,
    p: &HPoint,
    x2_sign: f64,
    alpha: f64,
) -> Result<LevelSetCurvature> {
    if p.n() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: p.n() });
    }
    let grad = gradient(phi, &p.coords());
    let frames = [real_frame(FrameKind::X(0), p), real_frame(FrameKind::Y(0), p).scale(x2_sign)];
    let kinds = [FrameKind::X(0), FrameKind::Y(0)];
    let sign = [1.0, x2_sign];
    let xphi = [dot(&frames[0].0, &grad), dot(&frames[1].0, &grad)];
    let norm = libm::sqrt(xphi[0] * xphi[0] + xphi[1] * xphi[1]);
    if norm < alpha {
        return Err(Error::CharacteristicPoint { horizontal_gradient: norm });
    }
    let tphi = grad[2];
    if tphi.abs() > 1e-8 * (1.0 + grad.iter().fold(0.0f64, |m, g| m.max(g.abs()))) {
        return Err(Error::NotTTangent { t_derivative: tphi });
    }
    let xx = |j: usize, k: usize| sign[j] * sign[k] * frame_compose(kinds[j], kinds[k], phi, p);
    let n3 = norm * norm * norm;
    let mut div = 0.0;
    for j in 0..2 {
        div += xx(j, j) / norm;
        for k in 0..2 {
            div -= xphi[j] * xphi[k] * xx(j, k) / n3;
        }
    }
    let xi = frames[0].scale(xphi[0] / norm).add(&frames[1].scale(xphi[1] / norm));
    let e = frames[0].scale(xphi[1] / norm).sub(&frames[1].scale(xphi[0] / norm));
    let mean = -0.5 * div;
    Ok(LevelSetCurvature { h: xi.scale(mean), mean, e, xi })
}

/// Conformal surface chart `z = x + iy ↦ Ψ(z) ∈ Hₙ`, with `F^j = Ψ^j + iΨ^{j+n}`
/// and `f = Ψ^{2n}`.
#[derive(Clone, Debug)]
pub struct SurfaceChart<F> {
    pub map: F,
    pub n: usize,
}

/// Complex derivatives of a chart at one point.
#[derive(Clone, Debug)]
pub struct ChartJet {
    pub psi: Vec<f64>,
    /// `∂Ψ^A/∂z`.
    pub phi: Vec<Complex64>,
    /// `∂²Ψ^A/∂z∂z̄`.
    pub psi_zzbar: Vec<f64>,
    /// `F^j_z`, `F^j_{z̄}`.
    pub f_z: Vec<Complex64>,
    pub f_zbar: Vec<Complex64>,
    /// `K = θ₀(Ψ_*∂_z) = f_z + iΣ(F^j F̄^j_z − F̄^j F^j_z)`.
    pub k: Complex64,
    /// `E = g(Ψ_*∂_z, Ψ_*∂_z̄)`, so `g = 2E(dx² + dy²)` on a conformal chart.
    pub e: f64,
}

impl<F: VectorMap> SurfaceChart<F> {
    pub fn new(map: F, n: usize) -> Self {
        Self { map, n }
    }

    pub fn jet(&self, z: Complex64) -> ChartJet {
        let n = self.n;
        let jet = map_jet(&self.map, &[z.re, z.im]);
        let d = 2 * n + 1;
        let phi: Vec<Complex64> = (0..d).map(|a| Complex64::new(jet.d1[0][a], -jet.d1[1][a]) * 0.5).collect();
        let phib: Vec<Complex64> = phi.iter().map(|c| c.conj()).collect();
        let psi_zzbar: Vec<f64> = (0..d).map(|a| 0.25 * (jet.d2[0][0][a] + jet.d2[1][1][a])).collect();
        let i = Complex64::new(0.0, 1.0);
        let f_z: Vec<Complex64> = (0..n).map(|j| phi[j] + i * phi[j + n]).collect();
        let f_zbar: Vec<Complex64> = (0..n).map(|j| phib[j] + i * phib[j + n]).collect();
        let psi = jet.value;
        let mut k = phi[2 * n];
        for j in 0..n {
            k += (phi[j + n] * psi[j] - phi[j] * psi[j + n]) * 2.0;
        }
        let e = f_z.iter().chain(&f_zbar).map(|c| c.norm_sqr()).sum::<f64>() + k.norm_sqr();
        ChartJet { psi, phi, psi_zzbar, f_z, f_zbar, k, e }
    }

    pub fn immersion(&self) -> Immersion<impl Fn(&[Hd]) -> Vec<Hd> + '_> {
        Immersion { map: move |u: &[Hd]| self.map.eval(u), m: 2, n: self.n }
    }
}

/// `T = Tᵀ + T^⊥` on a chart, with `Tᵀ = (K̄/E)Ψ_*∂_z + c.c.`.
#[derive(Clone, Debug)]
pub struct CharDecomposition {
    pub tangential: TangentVector,
    pub normal: TangentVector,
    pub k: Complex64,
    pub e: f64,
}

pub fn surface_char_decomposition<F: VectorMap>(ch: &SurfaceChart<F>, z: Complex64) -> Result<CharDecomposition> {
    let j = ch.jet(z);
    if !(j.e > 1e-14) {
        return Err(Error::DegenerateChart { e: j.e });
    }
    let lambda = j.k.conj() / j.e;
    let tangential = TangentVector(j.phi.iter().map(|c| 2.0 * (lambda * c).re).collect());
    let normal = TangentVector::basis(ch.n, 2 * ch.n).sub(&tangential);
    Ok(CharDecomposition { tangential, normal, k: j.k, e: j.e })
}

/// `r₁ = 2ΣF^j_z·conj(F^j_{z̄}) + K² = g(Ψ_z, Ψ_z)` and
/// `r₂ = Σ(|F^j_z|² + |F^j_{z̄}|²) + |K|²`.
pub fn conformality_residuals<F: VectorMap>(ch: &SurfaceChart<F>, z: Complex64) -> (Complex64, f64) {
    let j = ch.jet(z);
    let mut r1 = j.k * j.k;
    for (a, b) in j.f_z.iter().zip(&j.f_zbar) {
        r1 += a * b.conj() * 2.0;
    }
    let r2 = j.f_z.iter().chain(&j.f_zbar).map(|c| c.norm_sqr()).sum::<f64>() + j.k.norm_sqr();
    (r1, r2)
}

/// Residuals of `F^j_{zz̄} + i(K̄F^j_z + KF^j_{z̄}) = 0` and
/// `f_{zz̄} − (K̄(|F|²)_z + K(|F|²)_{z̄}) = 0`.
pub fn surface_pde_residual<F: VectorMap>(ch: &SurfaceChart<F>, z: Complex64) -> (Vec<Complex64>, f64) {
    let n = ch.n;
    let j = ch.jet(z);
    let i = Complex64::new(0.0, 1.0);
    let mut res = Vec::with_capacity(n);
    let mut mod_z = Complex64::new(0.0, 0.0);
    for a in 0..n {
        let fa = Complex64::new(j.psi[a], j.psi[a + n]);
        let fzz = Complex64::new(j.psi_zzbar[a], j.psi_zzbar[a + n]);
        res.push(fzz + i * (j.k.conj() * j.f_z[a] + j.k * j.f_zbar[a]));
        mod_z += fa.conj() * j.f_z[a] + fa * j.f_zbar[a].conj();
    }
    let t = j.psi_zzbar[2 * n] - (j.k.conj() * mod_z + j.k * mod_z.conj()).re;
    (res, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn plane(u: &[Hd]) -> Vec<Hd> {
        vec![u[0], Hd::cst(0.0), u[1] * core::f64::consts::SQRT_2]
    }

    #[test]
    fn vertical_plane() {
        let im = Immersion::new(plane, 2, 1).unwrap();
        let g = pullback_metric(&im, &[0.3, -0.2]).unwrap();
        assert!(g.max_abs_diff(&Mat::from_fn(2, 2, |a, b| if a == b { 2.0 } else { 0.0 })) < 1e-15);
        assert!(minimality_residual(&im, &[0.3, -0.2]).unwrap().max_abs() < 1e-14);
        let ch = SurfaceChart::new(plane, 1);
        let j = ch.jet(Complex64::new(0.3, -0.2));
        assert!((j.k - Complex64::new(0.0, -core::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((j.e - 1.0).abs() < 1e-15);
        let (r1, r2) = conformality_residuals(&ch, Complex64::new(0.3, -0.2));
        assert!(r1.norm() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
        let d = surface_char_decomposition(&ch, Complex64::new(0.3, -0.2)).unwrap();
        assert!(d.normal.max_abs() < 1e-15);
    }

    #[test]
    fn curve_along_t() {
        let im = Immersion::new(|u: &[Hd]| vec![Hd::cst(0.5), Hd::cst(-1.0), u[0]], 1, 1).unwrap();
        let g = pullback_metric(&im, &[0.7]).unwrap();
        assert_eq!(g.data, vec![1.0]);
    }

    #[test]
    fn degenerate_map_is_rejected() {
        let im = Immersion::new(|u: &[Hd]| vec![u[0], u[0], Hd::cst(0.0)], 2, 1).unwrap();
        assert!(matches!(pullback_metric(&im, &[0.1, 0.2]), Err(Error::NotImmersion { rank: 1, dim: 2 })));
        let ch = SurfaceChart::new(|_: &[Hd]| vec![Hd::cst(1.0); 3], 1);
        assert_eq!(conformality_residuals(&ch, Complex64::new(0.0, 0.0)).1, 0.0);
        assert!(matches!(surface_char_decomposition(&ch, Complex64::new(0.0, 0.0)), Err(Error::DegenerateChart { .. })));
    }
}
