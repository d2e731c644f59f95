//! The Heisenberg group `Hₙ = Cⁿ × R`.
//!
//! Coordinates are always laid out as `(x¹..xⁿ, y¹..yⁿ, t)` with `t` at index
//! `2n`. Frames:
//!
//! * `Z_j = ∂/∂z_j + i z̄_j ∂/∂t`
//! * `X_j = (Z_j + Z̄_j)/√2 = (∂_{x_j} + 2y_j ∂_t)/√2`
//! * `Y_j = i(Z_j − Z̄_j)/√2 = (∂_{y_j} − 2x_j ∂_t)/√2`
//! * `T = ∂_t`
//!
//! The contact form is `θ₀ = dt + 2Σ(x_j dy_j − y_j dx_j)`. Exterior
//! derivatives use the convention `dθ(X,Y) = ½(Xθ(Y) − Yθ(X) − θ([X,Y]))`, so
//! `dθ₀(∂_{x_j}, ∂_{y_k}) = 2δ_{jk}` and `g_θ(X,Y) = dθ(X,JY)` on `H`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{complex_jet, ComplexField};
use crate::linalg::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn origin(n: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); n], t: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Inverse of [`HPoint::coords`].
    pub fn from_coords(c: &[f64]) -> Self {
        let n = (c.len() - 1) / 2;
        Self {
            z: (0..n).map(|j| Complex64::new(c[j], c[j + n])).collect(),
            t: c[2 * n],
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; 2 * n + 1];
        for (j, z) in self.z.iter().enumerate() {
            c[j] = z.re;
            c[j + n] = z.im;
        }
        c[2 * n] = self.t;
        c
    }

    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `φ(z,t) = |z|² − it`.
    pub fn phi(&self) -> Complex64 {
        Complex64::new(self.z_norm_sqr(), -self.t)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Coefficients over `(∂_{x¹}..∂_{yⁿ}, ∂_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector(pub Vec<f64>);

impl TangentVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; 2 * n + 1])
    }

    pub fn basis(n: usize, a: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[a] = 1.0;
        v
    }

    pub fn n(&self) -> usize {
        (self.0.len() - 1) / 2
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.0)
    }
}

/// Complexified tangent vector stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTangent {
    pub re: TangentVector,
    pub im: TangentVector,
}

impl ComplexTangent {
    pub fn real(v: TangentVector) -> Self {
        let n = v.n();
        Self { re: v, im: TangentVector::zeros(n) }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.scale(-1.0) }
    }

    /// `w · self` for a complex scalar `w`.
    pub fn scale_c(&self, w: Complex64) -> Self {
        Self {
            re: self.re.scale(w.re).sub(&self.im.scale(w.im)),
            im: self.im.scale(w.re).add(&self.re.scale(w.im)),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn max_abs(&self) -> f64 {
        self.re.max_abs().max(self.im.max_abs())
    }
}

/// Frame field selector. Indices are zero-based: `Z(0)` is `Z₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Z(usize),
    Zbar(usize),
    X(usize),
    Y(usize),
    T,
}

pub fn group_mul(p: &HPoint, q: &HPoint) -> HPoint {
    assert_eq!(p.n(), q.n());
    let cross: f64 = p.z.iter().zip(&q.z).map(|(a, b)| (a * b.conj()).im).sum();
    HPoint {
        z: p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect(),
        t: p.t + q.t + 2.0 * cross,
    }
}

pub fn group_inv(p: &HPoint) -> HPoint {
    HPoint { z: p.z.iter().map(|a| -a).collect(), t: -p.t }
}

/// Parabolic dilation `(z,t) ↦ (λz, λ²t)`.
pub fn dilate(lambda: f64, p: &HPoint) -> HPoint {
    HPoint { z: p.z.iter().map(|a| a * lambda).collect(), t: lambda * lambda * p.t }
}

/// `|x| = (|z|⁴ + t²)^{1/4}`.
pub fn heis_norm(p: &HPoint) -> f64 {
    let r2 = p.z_norm_sqr();
    libm::sqrt(libm::sqrt(r2 * r2 + p.t * p.t))
}

/// Generic Heisenberg norm on coordinates, for differentiation.
pub fn heis_norm_coords<S: Scalar>(c: &[S]) -> S {
    let n = (c.len() - 1) / 2;
    let mut r2 = S::zero();
    for &x in &c[..2 * n] {
        r2 += x * x;
    }
    (r2 * r2 + c[2 * n] * c[2 * n]).powf(0.25)
}

pub fn frame_vector(k: FrameKind, p: &HPoint) -> ComplexTangent {
    let n = p.n();
    let mut re = TangentVector::zeros(n);
    let mut im = TangentVector::zeros(n);
    match k {
        FrameKind::Z(j) | FrameKind::Zbar(j) => {
            let s = if matches!(k, FrameKind::Z(_)) { 1.0 } else { -1.0 };
            let (x, y) = (p.z[j].re, p.z[j].im);
            re.0[j] = 0.5;
            im.0[j + n] = -0.5 * s;
            re.0[2 * n] = y;
            im.0[2 * n] = s * x;
        }
        FrameKind::X(j) => {
            re.0[j] = FRAC_1_SQRT_2;
            re.0[2 * n] = 2.0 * FRAC_1_SQRT_2 * p.z[j].im;
        }
        FrameKind::Y(j) => {
            re.0[j + n] = FRAC_1_SQRT_2;
            re.0[2 * n] = -2.0 * FRAC_1_SQRT_2 * p.z[j].re;
        }
        FrameKind::T => re.0[2 * n] = 1.0,
    }
    ComplexTangent { re, im }
}

/// Real frame field; panics on `Z`/`Zbar`.
pub fn real_frame(k: FrameKind, p: &HPoint) -> TangentVector {
    assert!(matches!(k, FrameKind::X(_) | FrameKind::Y(_) | FrameKind::T));
    frame_vector(k, p).re
}

/// Orthonormal frame `X₁..Xₙ, Y₁..Yₙ` of `H(Hₙ)`.
pub fn horizontal_frame(p: &HPoint) -> Vec<TangentVector> {
    let n = p.n();
    (0..n)
        .map(|j| real_frame(FrameKind::X(j), p))
        .chain((0..n).map(|j| real_frame(FrameKind::Y(j), p)))
        .collect()
}

/// Coefficients of `θ₀` over `(dx, dy, dt)`.
pub fn theta0_coeffs<S: Scalar>(c: &[S]) -> Vec<S> {
    let n = (c.len() - 1) / 2;
    let mut th = vec![S::zero(); 2 * n + 1];
    for j in 0..n {
        th[j] = c[j + n] * -2.0;
        th[j + n] = c[j] * 2.0;
    }
    th[2 * n] = S::one();
    th
}

pub fn theta0_eval(p: &HPoint, v: &TangentVector) -> f64 {
    crate::linalg::dot(&theta0_coeffs(&p.coords()), &v.0)
}

/// `dθ₀(v, w) = 2Σ(v_{x_j} w_{y_j} − v_{y_j} w_{x_j})`.
pub fn dtheta0(v: &[f64], w: &[f64]) -> f64 {
    let n = (v.len() - 1) / 2;
    (0..n).map(|j| 2.0 * (v[j] * w[j + n] - v[j + n] * w[j])).sum()
}

/// Matrix of the complex structure extended by `JT = 0`; column `A` is `J∂_A`.
pub fn j_matrix(p: &HPoint) -> Mat {
    let n = p.n();
    let mut m = Mat::zeros(2 * n + 1, 2 * n + 1);
    for j in 0..n {
        let (x, y) = (p.z[j].re, p.z[j].im);
        m[(j + n, j)] = 1.0;
        m[(2 * n, j)] = -2.0 * x;
        m[(j, j + n)] = -1.0;
        m[(2 * n, j + n)] = -2.0 * y;
    }
    m
}

pub fn apply_j(p: &HPoint, v: &TangentVector) -> TangentVector {
    TangentVector(j_matrix(p).mul_vec(&v.0))
}

/// Webster metric entries, row-major, generic in the scalar type.
pub fn webster_metric_coords<S: Scalar>(c: &[S]) -> Vec<S> {
    let n = (c.len() - 1) / 2;
    let d = 2 * n + 1;
    let (x, y) = (&c[..n], &c[n..2 * n]);
    let mut g = vec![S::zero(); d * d];
    let mut set = |a: usize, b: usize, v: S| {
        g[a * d + b] = v;
        g[b * d + a] = v;
    };
    for j in 0..n {
        for k in 0..n {
            let dl = if j == k { 1.0 } else { 0.0 };
            set(j, k, (y[j] * y[k] * 2.0 + dl) * 2.0);
            set(j + n, k + n, (x[j] * x[k] * 2.0 + dl) * 2.0);
            set(j, k + n, y[j] * x[k] * -4.0);
        }
        set(j, 2 * n, y[j] * -2.0);
        set(j + n, 2 * n, x[j] * 2.0);
    }
    set(2 * n, 2 * n, S::one());
    g
}

pub fn webster_metric(p: &HPoint) -> Mat {
    let d = 2 * p.n() + 1;
    Mat { rows: d, cols: d, data: webster_metric_coords(&p.coords()) }
}

/// Closed-form inverse of the Webster metric.
pub fn webster_cometric(p: &HPoint) -> Mat {
    let n = p.n();
    let d = 2 * n + 1;
    let mut m = Mat::zeros(d, d);
    for j in 0..n {
        m[(j, j)] = 0.5;
        m[(j + n, j + n)] = 0.5;
        m[(j, 2 * n)] = p.z[j].im;
        m[(2 * n, j)] = p.z[j].im;
        m[(j + n, 2 * n)] = -p.z[j].re;
        m[(2 * n, j + n)] = -p.z[j].re;
    }
    m[(2 * n, 2 * n)] = 1.0 + 2.0 * p.z_norm_sqr();
    m
}

pub fn metric_eval(p: &HPoint, v: &TangentVector, w: &TangentVector) -> f64 {
    webster_metric(p).bilinear(&v.0, &w.0)
}

fn apply_complex(v: &ComplexTangent, grad: &[crate::scalar::Cx<f64>]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, g) in grad.iter().enumerate() {
        acc += Complex64::new(v.re.0[a], v.im.0[a]) * Complex64::new(g.re, g.im);
    }
    acc
}

/// `Z̄_j(u)(p)` for each `j`: the tangential Cauchy–Riemann residual.
pub fn cr_residual<F: ComplexField + ?Sized>(u: &F, p: &HPoint) -> Vec<Complex64> {
    let jet = complex_jet(u, &p.coords());
    (0..p.n())
        .map(|j| apply_complex(&frame_vector(FrameKind::Zbar(j), p), &jet.grad))
        .collect()
}

/// `Z_j(u)(p)` for each `j`.
pub fn holomorphic_derivatives<F: ComplexField + ?Sized>(u: &F, p: &HPoint) -> Vec<Complex64> {
    let jet = complex_jet(u, &p.coords());
    (0..p.n())
        .map(|j| apply_complex(&frame_vector(FrameKind::Z(j), p), &jet.grad))
        .collect()
}

/// Frame of the Heisenberg sphere through `p` together with its normal field.
#[derive(Clone, Debug)]
pub struct FoliationFrame {
    pub e: Vec<TangentVector>,
    pub f: Vec<TangentVector>,
    pub v: TangentVector,
}

/// `E_j = Z_j + Z̄_j − (1/t)(φz_j + φ̄z̄_j)T`,
/// `F_j = i(Z_j − Z̄_j) + (i/t)(φz_j − φ̄z̄_j)T`,
/// `V = T + (φ/t)z_jZ_j + (φ̄/t)z̄_jZ̄_j`.
pub fn foliation_frame(p: &HPoint) -> Result<FoliationFrame> {
    let n = p.n();
    let scale = 1.0 + p.z_norm_sqr();
    if p.t.abs() <= f64::EPSILON * scale {
        return Err(Error::DegeneratePoint);
    }
    let phi = p.phi();
    let t = p.t;
    let mut e = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut v = TangentVector::basis(n, 2 * n);
    for j in 0..n {
        let (x, y) = (p.z[j].re, p.z[j].im);
        let w = phi * p.z[j];
        let mut ej = TangentVector::zeros(n);
        ej.0[j] = 1.0;
        ej.0[2 * n] = 2.0 * y - 2.0 * w.re / t;
        let mut fj = TangentVector::zeros(n);
        fj.0[j + n] = 1.0;
        fj.0[2 * n] = -2.0 * x - 2.0 * w.im / t;
        e.push(ej);
        f.push(fj);
        let zj = frame_vector(FrameKind::Z(j), p);
        let c = w / t;
        // 2 Re(c Z_j)
        let part = zj.re.scale(2.0 * c.re).sub(&zj.im.scale(2.0 * c.im));
        v = v.add(&part);
    }
    Ok(FoliationFrame { e, f, v })
}

/// Local frame `∂/∂z_a − (z̄_a/z̄_n)∂/∂z_n`, `a < n−1`, of `T_{1,0}` on the
/// boundary `t = 0`, valid where `z_n ≠ 0`.
pub fn boundary_cr_frame(p: &HPoint) -> Result<Vec<ComplexTangent>> {
    let n = p.n();
    let zn = p.z[n - 1];
    if zn.norm_sqr() == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    let dz = |j: usize| {
        // ∂/∂z_j = ½(∂_x − i∂_y)
        let mut re = TangentVector::zeros(n);
        let mut im = TangentVector::zeros(n);
        re.0[j] = 0.5;
        im.0[j + n] = -0.5;
        ComplexTangent { re, im }
    };
    Ok((0..n - 1)
        .map(|a| dz(a).sub(&dz(n - 1).scale_c(p.z[a].conj() / zn.conj())))
        .collect())
}

/// `F = f⁻¹ ∘ C`: the Cayley transform onto the Siegel domain followed by
/// `(z, w) ↦ (z, Re w)`.
pub fn cayley_to_heisenberg(zeta: &[Complex64]) -> Result<HPoint> {
    let norm: f64 = libm::sqrt(zeta.iter().map(|z| z.norm_sqr()).sum());
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere { norm });
    }
    let n = zeta.len() - 1;
    let last = zeta[n];
    let den = Complex64::new(1.0, 0.0) + last;
    if den.norm_sqr() <= 1e-28 {
        return Err(Error::PoleOfCayley);
    }
    let z = zeta[..n].iter().map(|a| a / den).collect();
    let w = Complex64::new(0.0, 1.0) * (Complex64::new(1.0, 0.0) - last) / den;
    Ok(HPoint { z, t: w.re })
}

/// `C(ζ)` itself, returning `(z, w)` in the Siegel domain picture.
pub fn cayley(zeta: &[Complex64]) -> Result<(Vec<Complex64>, Complex64)> {
    let n = zeta.len() - 1;
    let den = Complex64::new(1.0, 0.0) + zeta[n];
    if den.norm_sqr() <= 1e-28 {
        return Err(Error::PoleOfCayley);
    }
    let z = zeta[..n].iter().map(|a| a / den).collect();
    let w = Complex64::new(0.0, 1.0) * (Complex64::new(1.0, 0.0) - zeta[n]) / den;
    Ok((z, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gradient, Hd};
    use crate::scalar::Cx;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn group_law_example() {
        let p = HPoint::new(vec![c(1.0, 0.0)], 0.0);
        let q = HPoint::new(vec![c(0.0, 1.0)], 0.0);
        let r = group_mul(&p, &q);
        assert_eq!(r.z[0], c(1.0, 1.0));
        assert_eq!(r.t, -2.0);
        assert_eq!(group_inv(&HPoint::new(vec![c(1.0, 1.0)], 3.0)).coords(), vec![-1.0, -1.0, -3.0]);
    }

    #[test]
    fn norm_examples() {
        assert!((heis_norm(&HPoint::new(vec![c(0.0, 0.0)], 4.0)) - 2.0).abs() < 1e-15);
        assert!((heis_norm(&HPoint::new(vec![c(0.6, 0.8)], 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(heis_norm(&HPoint::origin(2)), 0.0);
    }

    #[test]
    fn frame_examples() {
        let p = HPoint::new(vec![c(0.3, -0.7)], 1.2);
        let x1 = real_frame(FrameKind::X(0), &p);
        let s = FRAC_1_SQRT_2;
        assert_eq!(x1.0, vec![s, 0.0, 2.0 * s * -0.7]);
        assert_eq!(real_frame(FrameKind::T, &p).0, vec![0.0, 0.0, 1.0]);
        // Z + Z̄ − 2yT = ∂_x
        let z = frame_vector(FrameKind::Z(0), &p);
        let zb = frame_vector(FrameKind::Zbar(0), &p);
        let sum = z.add(&zb);
        let dx = sum.re.sub(&TangentVector::basis(1, 2).scale(2.0 * -0.7));
        assert!(dx.sub(&TangentVector::basis(1, 0)).max_abs() < 1e-15);
        assert!(sum.im.max_abs() < 1e-15);
        // X = (Z + Z̄)/√2, Y = i(Z − Z̄)/√2
        assert!(sum.re.scale(s).sub(&x1).max_abs() < 1e-15);
        let y = z.sub(&zb).scale_c(c(0.0, s));
        assert!(y.re.sub(&real_frame(FrameKind::Y(0), &p)).max_abs() < 1e-15);
        assert!(y.im.max_abs() < 1e-15);
    }

    #[test]
    fn theta_examples() {
        let p = HPoint::new(vec![c(0.3, -0.7), c(1.1, 0.4)], 0.5);
        assert_eq!(theta0_eval(&p, &TangentVector::basis(2, 4)), 1.0);
        assert!((theta0_eval(&p, &TangentVector::basis(2, 1)) - (-0.8)).abs() < 1e-15);
        for v in horizontal_frame(&p) {
            assert!(theta0_eval(&p, &v).abs() < 1e-15);
        }
    }

    #[test]
    fn cometric_is_inverse() {
        let p = HPoint::new(vec![c(0.3, -0.7), c(1.1, 0.4)], 0.5);
        let g = webster_metric(&p);
        assert!(g.matmul(&webster_cometric(&p)).max_abs_diff(&Mat::identity(5)) < 1e-13);
        let g0 = webster_metric(&HPoint::origin(2));
        let expect = Mat::from_fn(5, 5, |i, j| if i != j { 0.0 } else if i < 4 { 2.0 } else { 1.0 });
        assert_eq!(g0, expect);
    }

    #[test]
    fn j_is_compatible() {
        let p = HPoint::new(vec![c(0.3, -0.7)], 0.5);
        let x = real_frame(FrameKind::X(0), &p);
        let y = real_frame(FrameKind::Y(0), &p);
        assert!(apply_j(&p, &x).sub(&y).max_abs() < 1e-15);
        assert!(apply_j(&p, &y).add(&x).max_abs() < 1e-15);
        assert!((dtheta0(&x.0, &apply_j(&p, &x).0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cr_residual_examples() {
        let p = HPoint::new(vec![c(0.3, -0.7), c(-0.2, 0.5)], 0.9);
        let phi = |x: &[Hd]| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
            Cx::new(r2, -x[4])
        };
        for r in cr_residual(&phi, &p) {
            assert!(r.norm() < 1e-14);
        }
        let zbar1 = |x: &[Hd]| Cx::new(x[0], -x[2]);
        let r = cr_residual(&zbar1, &p);
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-15 && r[1].norm() < 1e-15);
    }

    #[test]
    fn foliation_needs_t() {
        assert_eq!(foliation_frame(&HPoint::new(vec![c(1.0, 0.0)], 0.0)).unwrap_err(), Error::DegeneratePoint);
        let p = HPoint::new(vec![c(0.4, 0.2)], 0.7);
        let fr = foliation_frame(&p).unwrap();
        let g = webster_metric(&p);
        assert!(g.bilinear(&fr.e[0].0, &fr.v.0).abs() < 1e-13);
        let dn = gradient(&|x: &[Hd]| heis_norm_coords(x), &p.coords());
        assert!(crate::linalg::dot(&dn, &fr.e[0].0).abs() < 1e-13);
    }

    #[test]
    fn cayley_examples() {
        let p = cayley_to_heisenberg(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(p.coords(), vec![0.0, 0.0, 0.0]);
        assert_eq!(cayley_to_heisenberg(&[c(0.0, 0.0), c(-1.0, 0.0)]).unwrap_err(), Error::PoleOfCayley);
        assert!(matches!(cayley_to_heisenberg(&[c(0.5, 0.0), c(0.0, 0.0)]), Err(Error::NotOnSphere { .. })));
    }
}
