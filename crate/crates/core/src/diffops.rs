//! Differential operators on `(Hₙ, θ₀)`: horizontal gradient, sublaplacian,
//! Folland–Stein operators and their fundamental solutions, and the
//! Tanaka–Webster and Levi-Civita connections.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{
    complex_jet, gradient, hessian, map_directional, map_jet, ComplexField, Hd, ScalarField, VectorMap,
};
use crate::heis::{
    dtheta0, horizontal_frame, j_matrix, theta0_coeffs, webster_metric,
    FrameKind, HPoint, TangentVector,
};
use crate::linalg::{dot, Mat};
use crate::scalar::{Cx, Scalar};

/// Coordinate coefficients of a frame field, generic so the point can carry
/// derivatives. Returns real and imaginary parts.
pub fn frame_coeffs<S: Scalar>(k: FrameKind, c: &[S]) -> (Vec<S>, Vec<S>) {
    let n = (c.len() - 1) / 2;
    let mut re = vec![S::zero(); 2 * n + 1];
    let mut im = vec![S::zero(); 2 * n + 1];
    let s2 = core::f64::consts::FRAC_1_SQRT_2;
    match k {
        FrameKind::Z(j) | FrameKind::Zbar(j) => {
            let s = if matches!(k, FrameKind::Z(_)) { 1.0 } else { -1.0 };
            re[j] = S::cst(0.5);
            im[j + n] = S::cst(-0.5 * s);
            re[2 * n] = c[j + n];
            im[2 * n] = c[j] * s;
        }
        FrameKind::X(j) => {
            re[j] = S::cst(s2);
            re[2 * n] = c[j + n] * (2.0 * s2);
        }
        FrameKind::Y(j) => {
            re[j + n] = S::cst(s2);
            re[2 * n] = c[j] * (-2.0 * s2);
        }
        FrameKind::T => re[2 * n] = S::one(),
    }
    (re, im)
}

/// `V(W u)` for frame fields `V`, `W` applied to a complex field:
/// `v^A w^B u_AB + v^A (∂_A w^B) u_B`.
fn compose_frames<F: ComplexField + ?Sized>(v: FrameKind, w: FrameKind, u: &F, p: &HPoint) -> Complex64 {
    let x = p.coords();
    let d = x.len();
    let jet = complex_jet(u, &x);
    let (vr, vi) = frame_coeffs::<f64>(v, &x);
    let vc: Vec<Complex64> = (0..d).map(|a| Complex64::new(vr[a], vi[a])).collect();
    let (wr0, wi0) = frame_coeffs::<f64>(w, &x);
    let wc: Vec<Complex64> = (0..d).map(|a| Complex64::new(wr0[a], wi0[a])).collect();
    // directional derivative of w's coefficients along Re v and Im v
    let wre = |y: &[Hd]| frame_coeffs::<Hd>(w, y).0;
    let wim = |y: &[Hd]| frame_coeffs::<Hd>(w, y).1;
    let (_, dwr_r) = map_directional(&wre, &x, &vr);
    let (_, dwr_i) = map_directional(&wre, &x, &vi);
    let (_, dwi_r) = map_directional(&wim, &x, &vr);
    let (_, dwi_i) = map_directional(&wim, &x, &vi);
    let ug: Vec<Complex64> = jet.grad.iter().map(|g| Complex64::new(g.re, g.im)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            let uab = Complex64::new(jet.hess_re[(a, b)], jet.hess_im[(a, b)]);
            acc += vc[a] * wc[b] * uab;
        }
    }
    for b in 0..d {
        // v(w^B) = (Re v + i Im v)(Re w^B + i Im w^B)
        let vw = Complex64::new(dwr_r[b] - dwi_i[b], dwi_r[b] + dwr_i[b]);
        acc += vw * ug[b];
    }
    acc
}

struct RealAsComplex<'a, F: ?Sized>(&'a F);

impl<F: ScalarField + ?Sized> ComplexField for RealAsComplex<'_, F> {
    fn eval(&self, x: &[Hd]) -> Cx<Hd> {
        Cx::real(self.0.eval(x))
    }
}

/// `V(W u)` for real frame fields and a real field `u`.
pub fn frame_compose<F: ScalarField + ?Sized>(v: FrameKind, w: FrameKind, u: &F, p: &HPoint) -> f64 {
    compose_frames(v, w, &RealAsComplex(u), p).re
}

/// `∇^H u = Σ (X_j u) X_j + (Y_j u) Y_j`.
pub fn horizontal_gradient<F: ScalarField + ?Sized>(u: &F, p: &HPoint) -> TangentVector {
    let g = gradient(u, &p.coords());
    let mut out = TangentVector::zeros(p.n());
    for e in horizontal_frame(p) {
        out = out.add(&e.scale(dot(&e.0, &g)));
    }
    out
}

/// `‖∇^H u‖² = Σ (X_j u)² + (Y_j u)²`.
pub fn horizontal_gradient_norm_sqr<F: ScalarField + ?Sized>(u: &F, p: &HPoint) -> f64 {
    let g = gradient(u, &p.coords());
    horizontal_frame(p).iter().map(|e| { let v = dot(&e.0, &g); v * v }).sum()
}

/// `Δ_b u = Σ (X_j² + Y_j²) u`, by frame composition.
pub fn sublaplacian<F: ScalarField + ?Sized>(u: &F, p: &HPoint) -> f64 {
    let c = RealAsComplex(u);
    (0..p.n())
        .map(|j| {
            compose_frames(FrameKind::X(j), FrameKind::X(j), &c, p).re
                + compose_frames(FrameKind::Y(j), FrameKind::Y(j), &c, p).re
        })
        .sum()
}

/// Coordinate form
/// `½Σ(u_{x_jx_j} + u_{y_jy_j}) + 2Σ(y_j u_{x_jt} − x_j u_{y_jt}) + 2|z|² u_tt`.
pub fn sublaplacian_expanded<F: ScalarField + ?Sized>(u: &F, p: &HPoint) -> f64 {
    let n = p.n();
    let (_, _, h) = hessian(u, &p.coords());
    let t = 2 * n;
    let mut acc = 2.0 * p.z_norm_sqr() * h[(t, t)];
    for j in 0..n {
        let (x, y) = (p.z[j].re, p.z[j].im);
        acc += 0.5 * (h[(j, j)] + h[(j + n, j + n)]);
        acc += 2.0 * (y * h[(j, t)] - x * h[(j + n, t)]);
    }
    acc
}

/// Parameters of a Folland–Stein operator `L_α` on `Hₙ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FsParams {
    pub alpha: Complex64,
    pub n: usize,
}

impl FsParams {
    pub fn new(alpha: Complex64, n: usize) -> Self {
        Self { alpha, n }
    }

    /// `c_α ≠ 0`, i.e. neither `(n+α)/2` nor `(n−α)/2` is a pole of Γ.
    pub fn admissible(&self) -> bool {
        let n = self.n as f64;
        let pole = |w: Complex64| {
            w.im.abs() <= 1e-12 && w.re <= 1e-12 && (w.re - libm::round(w.re)).abs() <= 1e-12
        };
        !(pole((self.alpha + n) / 2.0) || pole((-self.alpha + n) / 2.0))
    }

    /// `c_α = 2^{2−2n} π^{n+1} / (Γ((n+α)/2) Γ((n−α)/2))`.
    pub fn c_alpha(&self) -> Complex64 {
        let n = self.n as f64;
        let pre = libm::pow(2.0, 2.0 - 2.0 * n) * libm::pow(PI, n + 1.0);
        rgamma((self.alpha + n) / 2.0) * rgamma((-self.alpha + n) / 2.0) * pre
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Γ by the Lanczos approximation with reflection.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        Complex64::new(PI, 0.0) / (s * gamma(Complex64::new(1.0, 0.0) - z))
    } else {
        let z = z - 1.0;
        let mut x = Complex64::new(LANCZOS[0], 0.0);
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            x += Complex64::new(c, 0.0) / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        x * libm::sqrt(2.0 * PI) * t.powc(z + 0.5) * (-t).exp()
    }
}

/// `1/Γ(z)`, entire; exact zero at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == libm::round(z.re) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        // 1/Γ(z) = Γ(1−z) sin(πz)/π
        gamma(Complex64::new(1.0, 0.0) - z) * (z * PI).sin() / PI
    } else {
        Complex64::new(1.0, 0.0) / gamma(z)
    }
}

/// `φ_α = φ^{−(n+α)/2} φ̄^{−(n−α)/2}` with `φ = |z|² − it`, principal
/// branches; `φ = ρe^{iA}` with `A ∈ (−π/2, π/2]` since `Re φ ≥ 0`.
pub fn fs_phi<S: Scalar>(alpha: Complex64, c: &[S]) -> Cx<S> {
    let n = (c.len() - 1) / 2;
    let mut r2 = S::zero();
    for &x in &c[..2 * n] {
        r2 += x * x;
    }
    let t = c[2 * n];
    let log_rho = (r2 * r2 + t * t).ln() * 0.5;
    let arg = (-t).atan2(r2);
    let modulus = (log_rho * -(n as f64) + arg * alpha.im).exp();
    let phase = arg * alpha.re;
    Cx::new(modulus * phase.cos(), -(modulus * phase.sin()))
}

/// `φ_α(p)/c_α`.
pub fn fs_fundamental(params: FsParams, p: &HPoint) -> Result<Complex64> {
    if !params.admissible() {
        return Err(Error::NotAdmissible);
    }
    if p.z_norm_sqr() == 0.0 && p.t == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    let v = fs_phi::<f64>(params.alpha, &p.coords());
    Ok(Complex64::new(v.re, v.im) / params.c_alpha())
}

/// `L_α u = −½ Σ (Z_j Z̄_j + Z̄_j Z_j) u + iα T u`.
pub fn folland_stein<F: ComplexField + ?Sized>(params: FsParams, u: &F, p: &HPoint) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..p.n() {
        acc += compose_frames(FrameKind::Z(j), FrameKind::Zbar(j), u, p);
        acc += compose_frames(FrameKind::Zbar(j), FrameKind::Z(j), u, p);
    }
    let jet = complex_jet(u, &p.coords());
    let ut = jet.grad[2 * p.n()];
    acc * -0.5 + Complex64::new(0.0, 1.0) * params.alpha * Complex64::new(ut.re, ut.im)
}

/// Connection coefficients `Γ^c_{ab}`, `∇_{∂_a}∂_b = Γ^c_{ab}∂_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffels {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffels {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.data[(c * self.dim + a) * self.dim + b]
    }

    pub fn set(&mut self, c: usize, a: usize, b: usize, v: f64) {
        let d = self.dim;
        self.data[(c * d + a) * d + b] = v;
    }

    /// `Γ^c_{ab} v^a w^b`.
    pub fn contract(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|c| {
                let mut s = 0.0;
                for a in 0..d {
                    if v[a] == 0.0 {
                        continue;
                    }
                    for b in 0..d {
                        s += self.get(c, a, b) * v[a] * w[b];
                    }
                }
                s
            })
            .collect()
    }

    /// `∇_v w` for a coefficient field `w` with derivative oracle.
    pub fn covariant<W: VectorMap + ?Sized>(&self, v: &[f64], w: &W, x: &[f64]) -> Vec<f64> {
        let (w0, dw) = map_directional(w, x, v);
        let g = self.contract(v, &w0);
        dw.iter().zip(g).map(|(a, b)| a + b).collect()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        crate::linalg::max_abs(&crate::linalg::sub(&self.data, &o.data))
    }
}

/// Levi-Civita coefficients of a metric given as a row-major matrix field,
/// `Γ^c_{ab} = ½ g^{cd}(∂_a g_{db} + ∂_b g_{da} − ∂_d g_{ab})`, with exact
/// metric derivatives.
pub fn metric_christoffels<G: VectorMap + ?Sized>(metric: &G, x: &[f64]) -> Christoffels {
    let d = x.len();
    let g0 = crate::field::map_value(metric, x);
    let ginv = Mat { rows: d, cols: d, data: g0 }.inverse().expect("metric must be invertible");
    let mut dg = vec![vec![0.0; d * d]; d];
    for (e, dge) in dg.iter_mut().enumerate() {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        *dge = map_directional(metric, x, &v).1;
    }
    let gd = |e: usize, a: usize, b: usize| dg[e][a * d + b];
    let mut out = Christoffels::zeros(d);
    for c in 0..d {
        for a in 0..d {
            for b in a..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += ginv[(c, k)] * (gd(a, k, b) + gd(b, k, a) - gd(k, a, b));
                }
                out.set(c, a, b, 0.5 * s);
                out.set(c, b, a, 0.5 * s);
            }
        }
    }
    out
}

/// Flat Tanaka–Webster connection:
/// `∇_{∂_j}∂_{k+n} = 2δ_{jk}T`, `∇_{∂_{j+n}}∂_k = −2δ_{jk}T`, all others zero.
pub fn tanaka_webster_derivative(n: usize, a: usize, b: usize) -> TangentVector {
    let mut v = TangentVector::zeros(n);
    if a < n && b >= n && b < 2 * n && b - n == a {
        v.0[2 * n] = 2.0;
    } else if a >= n && a < 2 * n && b < n && a - n == b {
        v.0[2 * n] = -2.0;
    }
    v
}

pub fn tanaka_webster_christoffels(n: usize) -> Christoffels {
    let d = 2 * n + 1;
    let mut g = Christoffels::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let v = tanaka_webster_derivative(n, a, b);
            for c in 0..d {
                g.set(c, a, b, v.0[c]);
            }
        }
    }
    g
}

/// Levi-Civita coefficients of `g_θ₀` in closed form from
/// `D⁰_X Y = ∇_X Y − dθ(X,Y)T + θ(X)JY + θ(Y)JX`.
pub fn levi_civita_christoffels(p: &HPoint) -> Christoffels {
    let n = p.n();
    let d = 2 * n + 1;
    let x = p.coords();
    let th = theta0_coeffs(&x);
    let j = j_matrix(p);
    let mut g = Christoffels::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let mut ea = vec![0.0; d];
            ea[a] = 1.0;
            let mut eb = vec![0.0; d];
            eb[b] = 1.0;
            let mut v = tanaka_webster_derivative(n, a, b).0;
            v[2 * n] -= dtheta0(&ea, &eb);
            for c in 0..d {
                v[c] += th[a] * j[(c, b)] + th[b] * j[(c, a)];
            }
            for c in 0..d {
                g.set(c, a, b, v[c]);
            }
        }
    }
    g
}

/// Levi-Civita coefficients of `g_θ₀` from metric derivatives.
pub fn levi_civita_christoffels_numeric(p: &HPoint) -> Christoffels {
    metric_christoffels(&|y: &[Hd]| crate::heis::webster_metric_coords(y), &p.coords())
}

/// `D⁰_v w` at `p` for a coefficient field `w`.
pub fn levi_civita_derivative<W: VectorMap + ?Sized>(v: &TangentVector, w: &W, p: &HPoint) -> TangentVector {
    TangentVector(levi_civita_christoffels(p).covariant(&v.0, w, &p.coords()))
}

/// `∇_v w` (Tanaka–Webster) at `p`.
pub fn tanaka_webster_covariant<W: VectorMap + ?Sized>(v: &TangentVector, w: &W, p: &HPoint) -> TangentVector {
    TangentVector(tanaka_webster_christoffels(p.n()).covariant(&v.0, w, &p.coords()))
}

/// Lie bracket `[V, W]` of coefficient fields.
pub fn lie_bracket<V: VectorMap + ?Sized, W: VectorMap + ?Sized>(v: &V, w: &W, x: &[f64]) -> Vec<f64> {
    let vx = crate::field::map_value(v, x);
    let wx = crate::field::map_value(w, x);
    let (_, dw) = map_directional(w, x, &vx);
    let (_, dv) = map_directional(v, x, &wx);
    dw.iter().zip(dv).map(|(a, b)| a - b).collect()
}

/// Torsion of `D⁰` on a pair of fields: `D_V W − D_W V − [V, W]`.
pub fn levi_civita_torsion<V: VectorMap + ?Sized, W: VectorMap + ?Sized>(v: &V, w: &W, p: &HPoint) -> Vec<f64> {
    let x = p.coords();
    let vx = TangentVector(crate::field::map_value(v, &x));
    let wx = TangentVector(crate::field::map_value(w, &x));
    let a = levi_civita_derivative(&vx, w, p);
    let b = levi_civita_derivative(&wx, v, p);
    let br = lie_bracket(v, w, &x);
    (0..x.len()).map(|i| a.0[i] - b.0[i] - br[i]).collect()
}

/// `X g(Y,Z) − g(D_X Y, Z) − g(Y, D_X Z)` for a constant direction `X` and
/// fields `Y`, `Z`.
pub fn metric_compatibility_defect<Y: VectorMap + ?Sized, Z: VectorMap + ?Sized>(
    xv: &TangentVector,
    y: &Y,
    z: &Z,
    p: &HPoint,
) -> f64 {
    let c = p.coords();
    let gyz = |q: &[Hd]| {
        let g = crate::heis::webster_metric_coords(q);
        let yv = y.eval(q);
        let zv = z.eval(q);
        let d = q.len();
        let mut s = Hd::constant(0.0);
        for a in 0..d {
            for b in 0..d {
                s += g[a * d + b] * yv[a] * zv[b];
            }
        }
        s
    };
    let lhs = crate::field::directional(&gyz, &c, &xv.0);
    let g = webster_metric(p);
    let dy = levi_civita_derivative(xv, y, p);
    let dz = levi_civita_derivative(xv, z, p);
    let y0 = crate::field::map_value(y, &c);
    let z0 = crate::field::map_value(z, &c);
    lhs - g.bilinear(&dy.0, &z0) - g.bilinear(&y0, &dz.0)
}

/// `d(θ₀)(T, v)` computed from the AD derivative of the coefficients of `θ₀`.
pub fn dtheta0_numeric(p: &HPoint, v: &[f64], w: &[f64]) -> f64 {
    // dθ(v,w) = ½(∂_a θ_b − ∂_b θ_a) v^a w^b
    let x = p.coords();
    let th = |y: &[Hd]| theta0_coeffs(y);
    let jet = map_jet(&th, &x);
    let d = x.len();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += 0.5 * (jet.d1[a][b] - jet.d1[b][a]) * v[a] * w[b];
        }
    }
    s
}

/// Horizontal frame field coefficient map, usable as a [`VectorMap`].
pub fn frame_field(k: FrameKind) -> impl Fn(&[Hd]) -> Vec<Hd> {
    move |y: &[Hd]| frame_coeffs::<Hd>(k, y).0
}
