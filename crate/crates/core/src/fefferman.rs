//! The circle bundle `C(Hₙ) = Hₙ × S¹` and its Fefferman metric.
//!
//! Coordinates on `C(Hₙ)` are `(x¹..xⁿ, y¹..yⁿ, t, γ)`. For `θ₀` with the
//! global frame `Z_j` the connection forms, the derivative of the Levi form
//! and the scalar curvature all vanish, so the connection 1-form is
//! `σ = dγ/(n+2)` and
//!
//! `F = 2Σ(dxʲ² + dyʲ²) + (θ₀ ⊗ dγ + dγ ⊗ θ₀)/(n+2)`.
//!
//! Horizontal lifts are `(v, 0)`. Covariant derivatives of `F` come from
//! AD Christoffels of the matrix above. With the `dθ(X,Y) = 2Σ(XˣYʸ − XʸYˣ)`
//! normalization used throughout the crate, `∇_{X↑}S = (JX)↑/(n+2)`, so the
//! rescaled fibre generator is `Ŝ = (n+2)S`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::diffops::{frame_field, metric_christoffels, tanaka_webster_covariant, Christoffels};
use crate::error::{Error, Result};
use crate::field::{constants, gradient, map_jet, Hd, ScalarField, VectorMap};
use crate::flat_boundary::BoundaryPoint;
use crate::heis::{apply_j, dtheta0, theta0_coeffs, webster_metric, webster_metric_coords, FrameKind, HPoint, TangentVector};
use crate::immersions::{mean_curvature_vector, Immersion};
use crate::linalg::{dot, signature, Mat};
use crate::scalar::Scalar;

/// A point of `C(Hₙ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePoint {
    pub base: HPoint,
    pub gamma: f64,
}

impl CirclePoint {
    /// `γ` is reduced mod `2π`.
    pub fn new(base: HPoint, gamma: f64) -> Self {
        let mut g = gamma % TAU;
        if g < 0.0 {
            g += TAU;
        }
        if g >= TAU {
            g = 0.0;
        }
        Self { base, gamma: g }
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.base.coords();
        c.push(self.gamma);
        c
    }

    pub fn from_coords(c: &[f64]) -> Self {
        let d = c.len() - 1;
        Self::new(HPoint::from_coords(&c[..d]), c[d])
    }
}

fn n_of(dim: usize) -> usize {
    (dim - 2) / 2
}

/// Coefficients of `σ = dγ/(n+2)` over `(dx, dy, dt, dγ)`.
pub fn sigma_conn_coeffs<S: Scalar>(c: &[S]) -> Vec<S> {
    let d = c.len();
    let mut s = vec![S::zero(); d];
    s[d - 1] = S::cst(1.0 / (n_of(d) as f64 + 2.0));
    s
}

/// `dσ(v, w)` from AD derivatives of the coefficients of `σ`.
pub fn dsigma_numeric(cp: &CirclePoint, v: &[f64], w: &[f64]) -> f64 {
    let x = cp.coords();
    let jet = map_jet(&|y: &[Hd]| sigma_conn_coeffs(y), &x);
    let d = x.len();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += 0.5 * (jet.d1[a][b] - jet.d1[b][a]) * v[a] * w[b];
        }
    }
    s
}

/// Entries of `F`, row-major, generic in the scalar type. `c` has length `2n+2`.
pub fn fefferman_metric_coords<S: Scalar>(c: &[S]) -> Vec<S> {
    let d = c.len();
    let n = n_of(d);
    let k = 1.0 / (n as f64 + 2.0);
    let th = theta0_coeffs(&c[..d - 1]);
    let mut g = vec![S::zero(); d * d];
    for a in 0..2 * n {
        g[a * d + a] = S::cst(2.0);
    }
    for a in 0..d - 1 {
        g[a * d + d - 1] = th[a] * k;
        g[(d - 1) * d + a] = th[a] * k;
    }
    g
}

pub fn fefferman_metric(cp: &CirclePoint) -> Mat {
    let d = 2 * cp.n() + 2;
    Mat { rows: d, cols: d, data: fefferman_metric_coords(&cp.coords()) }
}

/// `S = ∂/∂γ`.
pub fn s_vector(n: usize) -> Vec<f64> {
    let mut s = vec![0.0; 2 * n + 2];
    s[2 * n + 1] = 1.0;
    s
}

/// `Ŝ = (n+2)S`.
pub fn s_hat(n: usize) -> Vec<f64> {
    let mut s = s_vector(n);
    s[2 * n + 1] = n as f64 + 2.0;
    s
}

/// Horizontal lift with respect to `Ker σ`.
pub fn horizontal_lift(v: &TangentVector) -> Vec<f64> {
    let mut w = v.0.clone();
    w.push(0.0);
    w
}

/// `dπ`.
pub fn project(w: &[f64]) -> TangentVector {
    TangentVector(w[..w.len() - 1].to_vec())
}

/// Lift of a vector field on `Hₙ` to a field on `C(Hₙ)`.
pub fn lift_field<W: VectorMap>(w: W) -> impl Fn(&[Hd]) -> Vec<Hd> {
    move |y: &[Hd]| {
        let mut v = w.eval(&y[..y.len() - 1]);
        v.push(Hd::cst(0.0));
        v
    }
}

/// Constant coefficient field.
pub fn constant_field(v: Vec<f64>) -> impl Fn(&[Hd]) -> Vec<Hd> {
    move |_: &[Hd]| v.iter().map(|&a| Hd::cst(a)).collect()
}

/// Levi-Civita coefficients of `F` from AD derivatives of its matrix.
pub fn cm_christoffels(cp: &CirclePoint) -> Christoffels {
    metric_christoffels(&|y: &[Hd]| fefferman_metric_coords(y), &cp.coords())
}

/// `∇^C_v w` for a coefficient field `w` on `C(Hₙ)`.
pub fn cm_connection<W: VectorMap + ?Sized>(v: &[f64], w: &W, cp: &CirclePoint) -> Vec<f64> {
    cm_christoffels(cp).covariant(v, w, &cp.coords())
}

/// Names of the connection identities checked by [`connection_identities`].
pub const IDENTITY_LABELS: [&str; 7] = [
    "lift-lift",
    "lift-T",
    "T-lift",
    "lift-Shat",
    "T-T",
    "Shat-Shat",
    "Shat-T",
];

/// Residuals of the seven relations between `∇^C` and the Tanaka–Webster
/// connection (flat case, `A = 0`, `φ = 0`, `V = 0`), each a max over the
/// horizontal frame `{X_j, Y_j}`:
///
/// 1. `∇_{X↑}Y↑ − (∇_XY)↑ + dθ(X,Y)T↑`
/// 2. `∇_{X↑}T↑`
/// 3. `∇_{T↑}X↑ − (∇_TX)↑`
/// 4. `∇_{X↑}Ŝ − (JX)↑` and `∇_ŜX↑ − (JX)↑`
/// 5. `∇_{T↑}T↑`
/// 6. `∇_ŜŜ`
/// 7. `∇_ŜT↑` and `∇_{T↑}Ŝ`
pub fn connection_identities(cp: &CirclePoint) -> [f64; 7] {
    let n = cp.n();
    let p = &cp.base;
    let x = cp.coords();
    let gam = cm_christoffels(cp);
    let kinds: Vec<FrameKind> = (0..n).map(FrameKind::X).chain((0..n).map(FrameKind::Y)).collect();
    let t_up = horizontal_lift(&TangentVector::basis(n, 2 * n));
    let sh = s_hat(n);
    let t_field = constant_field(t_up.clone());
    let sh_field = constant_field(sh.clone());
    let diff = |a: &[f64], b: &[f64]| crate::linalg::max_abs(&crate::linalg::sub(a, b));
    let zero = vec![0.0; 2 * n + 2];
    let mut r = [0.0f64; 7];
    for &kx in &kinds {
        let xv = TangentVector(crate::field::map_value(&frame_field(kx), &p.coords()));
        let x_up = horizontal_lift(&xv);
        let x_field = lift_field(frame_field(kx));
        for &ky in &kinds {
            let yv = TangentVector(crate::field::map_value(&frame_field(ky), &p.coords()));
            let lhs = gam.covariant(&x_up, &lift_field(frame_field(ky)), &x);
            let tw = tanaka_webster_covariant(&xv, &frame_field(ky), p);
            let mut want = horizontal_lift(&tw);
            let dt = dtheta0(&xv.0, &yv.0);
            for (w, t) in want.iter_mut().zip(&t_up) {
                *w -= dt * t;
            }
            r[0] = r[0].max(diff(&lhs, &want));
        }
        r[1] = r[1].max(diff(&gam.covariant(&x_up, &t_field, &x), &zero));
        let tw_t = tanaka_webster_covariant(&TangentVector::basis(n, 2 * n), &frame_field(kx), p);
        r[2] = r[2].max(diff(&gam.covariant(&t_up, &x_field, &x), &horizontal_lift(&tw_t)));
        let jx = horizontal_lift(&apply_j(p, &xv));
        r[3] = r[3].max(diff(&gam.covariant(&x_up, &sh_field, &x), &jx));
        r[3] = r[3].max(diff(&gam.covariant(&sh, &x_field, &x), &jx));
    }
    r[4] = diff(&gam.covariant(&t_up, &t_field, &x), &zero);
    r[5] = diff(&gam.covariant(&sh, &sh_field, &x), &zero);
    r[6] = diff(&gam.covariant(&sh, &t_field, &x), &zero).max(diff(&gam.covariant(&t_up, &sh_field, &x), &zero));
    r
}

/// Null space and signature of the induced metric on `∂C(Hₙ⁺) = ∂Hₙ⁺ × S¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullSpace {
    pub dim: usize,
    /// Basis in boundary coordinates `(x, y, γ)`.
    pub basis: Vec<Vec<f64>>,
    /// `(positive, negative, zero)` eigenvalue counts.
    pub signature: (usize, usize, usize),
}

/// `j*F` on `∂Hₙ⁺ × S¹` in coordinates `(x, y, γ)`.
pub fn boundary_fefferman_metric(q: &BoundaryPoint) -> Mat {
    let n = q.n();
    let mut amb = BoundaryPoint::coords(q);
    amb.push(0.0);
    amb.push(0.0);
    let f = fefferman_metric_coords(&amb);
    let d = 2 * n + 2;
    let idx = |a: usize| if a < 2 * n { a } else { d - 1 };
    Mat::from_fn(2 * n + 1, 2 * n + 1, |a, b| f[idx(a) * d + idx(b)])
}

/// Null space of `j*F` at a point of `∂C(Hₙ⁺)`. Eigenvalues of magnitude
/// `≤ zero_tol` count as zero.
pub fn boundary_null_space(cp: &CirclePoint, zero_tol: f64) -> Result<NullSpace> {
    if cp.base.t != 0.0 {
        return Err(Error::InvalidDomain("base point is not on the boundary t = 0"));
    }
    let q = BoundaryPoint::new(cp.base.z.clone());
    let m = boundary_fefferman_metric(&q);
    let (vals, vecs) = m.symmetric_eigen();
    let basis: Vec<Vec<f64>> = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= zero_tol)
        .map(|(k, _)| (0..m.rows).map(|i| vecs[(i, k)]).collect())
        .collect();
    Ok(NullSpace { dim: basis.len(), basis, signature: signature(&m, zero_tol) })
}

/// Boundary models of `Hₙ` that are tangent to `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TBoundary {
    /// `{|z| = r} × R ⊂ H₁`, chart `(α, t) ↦ (r cos α, r sin α, t)`, outward normal.
    Cylinder { r: f64 },
    /// `{yⁿ = 0}` in `R^{2n}₊ × R`, chart `(x¹..xⁿ, y¹..y^{n−1}, t)`, normal along `Yₙ`.
    HalfSpace { n: usize },
}

type Field = Box<dyn Fn(&[Hd]) -> Vec<Hd>>;

impl TBoundary {
    pub fn n(&self) -> usize {
        match *self {
            TBoundary::Cylinder { .. } => 1,
            TBoundary::HalfSpace { n } => n,
        }
    }

    /// Chart of `∂M` into `Hₙ`.
    pub fn embed<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        match *self {
            TBoundary::Cylinder { r } => vec![u[0].cos() * r, u[0].sin() * r, u[1]],
            TBoundary::HalfSpace { .. } => crate::flat_boundary::halfspace::embed(u),
        }
    }

    /// Defining function, increasing along the chosen normal.
    pub fn defining<S: Scalar>(&self, x: &[S]) -> S {
        match *self {
            TBoundary::Cylinder { r } => x[0] * x[0] + x[1] * x[1] - r * r,
            TBoundary::HalfSpace { n } => x[2 * n - 1],
        }
    }

    pub fn point(&self, u: &[f64]) -> HPoint {
        HPoint::from_coords(&self.embed(u))
    }

    /// `g_θ`-orthonormal horizontal fields `E_a` spanning `T(∂M) ∩ H` and the unit normal `ξ`.
    pub fn frame(&self) -> (Vec<Field>, Field) {
        match *self {
            TBoundary::Cylinder { .. } => {
                let combo = |a: fn(&[Hd]) -> (Hd, Hd)| -> Field {
                    Box::new(move |y: &[Hd]| {
                        let (cx, cy) = a(y);
                        let x1 = frame_field(FrameKind::X(0))(y);
                        let x2 = frame_field(FrameKind::Y(0))(y);
                        x1.iter().zip(&x2).map(|(&p, &q)| p * cx + q * cy).collect()
                    })
                };
                let e = combo(|y| {
                    let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                    (y[1] / r, -y[0] / r)
                });
                let xi = combo(|y| {
                    let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                    (y[0] / r, y[1] / r)
                });
                (vec![e], xi)
            }
            TBoundary::HalfSpace { n } => {
                let mut es: Vec<Field> = Vec::new();
                for j in 0..n {
                    es.push(Box::new(frame_field(FrameKind::X(j))));
                }
                for j in 0..n - 1 {
                    es.push(Box::new(frame_field(FrameKind::Y(j))));
                }
                (es, Box::new(frame_field(FrameKind::Y(n - 1))))
            }
        }
    }

    /// Chart of `∂C(M)`: `(u, γ) ↦ (Ψ(u), γ)`.
    pub fn lifted_embed(&self) -> impl Fn(&[Hd]) -> Vec<Hd> + '_ {
        move |v: &[Hd]| {
            let d = v.len();
            let mut x = self.embed(&v[..d - 1]);
            x.push(v[d - 1]);
            x
        }
    }
}

/// Fails with [`Error::NotTTangent`] unless `Tφ = 0` at `p`.
pub fn check_t_tangent<F: ScalarField + ?Sized>(phi: &F, p: &HPoint) -> Result<()> {
    let g = gradient(phi, &p.coords());
    let t = g[2 * p.n()];
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if t.abs() > 1e-10 * (1.0 + scale) {
        return Err(Error::NotTTangent { t_derivative: t });
    }
    Ok(())
}

fn check_model(model: &TBoundary, u: &[f64]) -> Result<HPoint> {
    let m = 2 * model.n();
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: u.len() });
    }
    let p = model.point(u);
    check_t_tangent(&|x: &[Hd]| model.defining(x), &p)?;
    Ok(p)
}

/// Second fundamental form of a chart `ι : U → (R^D, G)` at one point.
#[derive(Clone, Debug)]
pub struct ChartSff {
    pub point: Vec<f64>,
    pub metric: Mat,
    pub tangents: Vec<Vec<f64>>,
    pub first: Mat,
    pub first_inv: Mat,
    /// `second[α][β] = (D_{∂_α}ι_*∂_β)^⊥`.
    pub second: Vec<Vec<Vec<f64>>>,
}

/// Gauss-formula second fundamental form of `embed` in the metric
/// `metric` (row-major matrix field with derivative oracle).
pub fn chart_sff<G: VectorMap + ?Sized, E: VectorMap + ?Sized>(metric: &G, embed: &E, u: &[f64]) -> Result<ChartSff> {
    let jet = map_jet(embed, u);
    let x = jet.value.clone();
    let d = x.len();
    let m = u.len();
    let gm = Mat { rows: d, cols: d, data: crate::field::map_value(metric, &x) };
    let gam = metric_christoffels(metric, &x);
    let first = Mat::from_fn(m, m, |a, b| gm.bilinear(&jet.d1[a], &jet.d1[b]));
    let first_inv = first.inverse().ok_or(Error::NotImmersion { rank: first.rank(1e-12), dim: m })?;
    let mut second = vec![vec![vec![0.0; d]; m]; m];
    for a in 0..m {
        for b in 0..m {
            let mut w = jet.d2[a][b].clone();
            for (wi, gi) in w.iter_mut().zip(gam.contract(&jet.d1[a], &jet.d1[b])) {
                *wi += gi;
            }
            let proj: Vec<f64> = (0..m).map(|c| gm.bilinear(&w, &jet.d1[c])).collect();
            for e in 0..m {
                let coef: f64 = (0..m).map(|c| first_inv[(e, c)] * proj[c]).sum();
                for k in 0..d {
                    w[k] -= coef * jet.d1[e][k];
                }
            }
            second[a][b] = w;
        }
    }
    Ok(ChartSff { point: x, metric: gm, tangents: jet.d1, first, first_inv, second })
}

impl ChartSff {
    /// `(1/m) trace 𝔹`.
    pub fn mean_curvature(&self) -> Vec<f64> {
        let m = self.tangents.len();
        let d = self.point.len();
        let mut h = vec![0.0; d];
        for a in 0..m {
            for b in 0..m {
                for k in 0..d {
                    h[k] += self.first_inv[(a, b)] * self.second[a][b][k];
                }
            }
        }
        h.iter().map(|v| v / m as f64).collect()
    }

    /// Chart coefficients of a tangent vector, and the norm of its normal remainder.
    pub fn chart_coefficients(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let m = self.tangents.len();
        let proj: Vec<f64> = (0..m).map(|c| self.metric.bilinear(v, &self.tangents[c])).collect();
        let coef: Vec<f64> = (0..m).map(|e| (0..m).map(|c| self.first_inv[(e, c)] * proj[c]).sum()).collect();
        let mut rest = v.to_vec();
        for (e, c) in coef.iter().enumerate() {
            for k in 0..rest.len() {
                rest[k] -= c * self.tangents[e][k];
            }
        }
        (coef, crate::linalg::max_abs(&rest))
    }

    /// `𝔹(v, w)` for tangent vectors given in ambient coordinates.
    pub fn eval(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let (cv, _) = self.chart_coefficients(v);
        let (cw, _) = self.chart_coefficients(w);
        let d = self.point.len();
        let mut out = vec![0.0; d];
        for (a, va) in cv.iter().enumerate() {
            for (b, wb) in cw.iter().enumerate() {
                for k in 0..d {
                    out[k] += va * wb * self.second[a][b][k];
                }
            }
        }
        out
    }
}

fn fefferman_field() -> impl Fn(&[Hd]) -> Vec<Hd> {
    |y: &[Hd]| fefferman_metric_coords(y)
}

fn point_and_frame(model: &TBoundary, u: &[f64]) -> (HPoint, Vec<TangentVector>, TangentVector, Vec<Field>) {
    let p = model.point(u);
    let (es, xi) = model.frame();
    let c = constants(&p.coords());
    let val = |f: &Field| TangentVector(f(&c).iter().map(|h| h.a).collect());
    let ev: Vec<TangentVector> = es.iter().map(val).collect();
    let xv = val(&xi);
    (p, ev, xv, es)
}

/// `ℍ` of `∂C(M)` computed three ways.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedMeanCurvature {
    /// Trace of the Gauss-formula second fundamental form in `(C(M), F)`.
    pub sff_trace: Vec<f64>,
    /// `(1/(2n+1)) Σ_a g(∇_{E_a}E_a, ξ) ξ↑` with the Tanaka–Webster connection.
    pub tanaka_webster: Vec<f64>,
    /// `(2n/(2n+1)) H↑` with `H` the mean curvature of `∂M` in `(M, g_θ)`.
    pub lifted: Vec<f64>,
    pub max_deviation: f64,
}

impl LiftedMeanCurvature {
    /// `F(ℍ, ℍ)^{1/2}` of the trace value.
    pub fn norm(&self, cp: &CirclePoint) -> f64 {
        libm::sqrt(fefferman_metric(cp).bilinear(&self.sff_trace, &self.sff_trace).abs())
    }
}

/// Mean curvature of `∂C(M)` at the point over chart parameter `u`.
pub fn cm_boundary_mean_curvature(model: &TBoundary, u: &[f64], gamma: f64) -> Result<LiftedMeanCurvature> {
    check_model(model, u)?;
    let n = model.n();
    let dim = 2 * n + 1;
    let mut v = u.to_vec();
    v.push(gamma);
    let sff = chart_sff(&fefferman_field(), &model.lifted_embed(), &v)?;
    let sff_trace = sff.mean_curvature();

    let (p, ev, xv, es) = point_and_frame(model, u);
    let g = webster_metric(&p);
    let mut s = 0.0;
    for (e, f) in ev.iter().zip(&es) {
        let d = tanaka_webster_covariant(e, f.as_ref(), &p);
        s += g.bilinear(&d.0, &xv.0);
    }
    let tanaka_webster = horizontal_lift(&xv.scale(s / dim as f64));

    let im = Immersion::new(|y: &[Hd]| model.embed(y), 2 * n, n)?;
    let h = mean_curvature_vector(&im, u)?;
    let lifted = horizontal_lift(&h.scale(2.0 * n as f64 / dim as f64));

    let dev = |a: &[f64], b: &[f64]| crate::linalg::max_abs(&crate::linalg::sub(a, b));
    let max_deviation = dev(&sff_trace, &tanaka_webster).max(dev(&sff_trace, &lifted)).max(dev(&tanaka_webster, &lifted));
    Ok(LiftedMeanCurvature { sff_trace, tanaka_webster, lifted, max_deviation })
}

/// Splittings of `T(∂C)` and `Ker σ` at one boundary point.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    /// Rank of `{lifts of a basis of T(∂M)} ∪ {S}`; should be `2n+1`.
    pub tangent_rank: usize,
    /// Max `|d(φ∘π)(v)|` over that set.
    pub tangent_defect: f64,
    /// Rank of `{lifts of a basis of T(∂M)} ∪ {ν}`, `ν` the `F`-normal; should be `2n+1`.
    pub kernel_rank: usize,
    /// Max `|σ(v)|` over that set.
    pub kernel_defect: f64,
    /// `|θ(dπ ν)|`: the normal projects into `H`.
    pub normal_horizontal_defect: f64,
    /// Max `|F(ξ↑, ∂_a)|` over the tangent vectors of `∂C`.
    pub normal_lift_defect: f64,
    /// `|F(ν̂, ξ↑)| − 1` for the unit normal `ν̂`: `ξ↑` spans the normal line.
    pub normal_alignment_defect: f64,
}

fn f_normal(model: &TBoundary, cp: &CirclePoint) -> Vec<f64> {
    let f = fefferman_metric(cp);
    let mut dphi = gradient(&|x: &[Hd]| model.defining(x), &cp.base.coords());
    dphi.push(0.0);
    f.inverse().expect("F is nondegenerate").mul_vec(&dphi)
}

pub fn decomposition_check(model: &TBoundary, u: &[f64], gamma: f64) -> Result<DecompositionReport> {
    let p = check_model(model, u)?;
    let n = model.n();
    let cp = CirclePoint::new(p.clone(), gamma);
    let f = fefferman_metric(&cp);
    let jet = map_jet(&|y: &[Hd]| model.embed(y), u);
    let lifts: Vec<Vec<f64>> = jet.d1.iter().map(|t| horizontal_lift(&TangentVector(t.clone()))).collect();
    let mut dphi = gradient(&|x: &[Hd]| model.defining(x), &p.coords());
    dphi.push(0.0);
    let sig = sigma_conn_coeffs(&cp.coords());

    let mut tang = lifts.clone();
    tang.push(s_vector(n));
    let stack = |vs: &[Vec<f64>]| Mat::from_fn(vs.len(), vs[0].len(), |i, j| vs[i][j]);
    let tangent_rank = stack(&tang).rank(1e-10);
    let tangent_defect = tang.iter().map(|v| dot(&dphi, v).abs()).fold(0.0, f64::max);

    let nu = f_normal(model, &cp);
    let mut ker = lifts.clone();
    ker.push(nu.clone());
    let kernel_rank = stack(&ker).rank(1e-10);
    let kernel_defect = ker.iter().map(|v| dot(&sig, v).abs()).fold(0.0, f64::max);
    let normal_horizontal_defect = theta_on(&p, &project(&nu)).abs();

    let (_, _, xv, _) = point_and_frame(model, u);
    let xi_up = horizontal_lift(&xv);
    let normal_lift_defect = tang.iter().map(|v| f.bilinear(&xi_up, v).abs()).fold(0.0, f64::max);
    let nn = libm::sqrt(f.bilinear(&nu, &nu));
    let normal_alignment_defect = (f.bilinear(&nu, &xi_up).abs() / nn - 1.0).abs();
    Ok(DecompositionReport {
        tangent_rank,
        tangent_defect,
        kernel_rank,
        kernel_defect,
        normal_horizontal_defect,
        normal_lift_defect,
        normal_alignment_defect,
    })
}

fn theta_on(p: &HPoint, v: &TangentVector) -> f64 {
    crate::heis::theta0_eval(p, v)
}

/// `{E_1↑, …, E_{2n−1}↑, T↑ + ((n+2)/2)S, T↑ − ((n+2)/2)S}`.
pub fn boundary_frame(model: &TBoundary, u: &[f64]) -> Vec<Vec<f64>> {
    let n = model.n();
    let (_, ev, _, _) = point_and_frame(model, u);
    let mut out: Vec<Vec<f64>> = ev.iter().map(horizontal_lift).collect();
    let t_up = horizontal_lift(&TangentVector::basis(n, 2 * n));
    let a = (n as f64 + 2.0) / 2.0;
    for s in [1.0, -1.0] {
        let mut v = t_up.clone();
        v[2 * n + 1] = s * a;
        out.push(v);
    }
    out
}

/// Gram matrix of [`boundary_frame`] in `F`.
pub fn boundary_frame_gram(model: &TBoundary, u: &[f64], gamma: f64) -> Mat {
    let fr = boundary_frame(model, u);
    let f = fefferman_metric(&CirclePoint::new(model.point(u), gamma));
    Mat::from_fn(fr.len(), fr.len(), |i, j| f.bilinear(&fr[i], &fr[j]))
}

/// Christoffels of `e^{f∘π}F` from AD derivatives of the rescaled matrix.
pub fn conformal_christoffels_ad<F: ScalarField + ?Sized>(f: &F, cp: &CirclePoint) -> Christoffels {
    let metric = |y: &[Hd]| {
        let s = f.eval(&y[..y.len() - 1]).exp();
        fefferman_metric_coords(y).into_iter().map(|g| g * s).collect::<Vec<_>>()
    };
    metric_christoffels(&metric, &cp.coords())
}

/// `D̂_VW = D_VW + ½{V(f)W + W(f)V − F(V,W) D(f∘π)}` as coefficients.
pub fn conformal_christoffels_formula<F: ScalarField + ?Sized>(f: &F, cp: &CirclePoint) -> Christoffels {
    let d = 2 * cp.n() + 2;
    let mut df = gradient(f, &cp.base.coords());
    df.push(0.0);
    let fm = fefferman_metric(cp);
    let grad = fm.inverse().expect("F is nondegenerate").mul_vec(&df);
    let mut out = cm_christoffels(cp);
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut v = -fm[(a, b)] * grad[c];
                if c == b {
                    v += df[a];
                }
                if c == a {
                    v += df[b];
                }
                out.set(c, a, b, out.get(c, a, b) + 0.5 * v);
            }
        }
    }
    out
}

/// Boundary quantities after `θ̂ = e^f θ`, i.e. `F̂ = e^{f∘π}F`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalShiftReport {
    /// `ℍ̂` from the second fundamental form of `∂C` in `F̂`.
    pub mean_curvature: Vec<f64>,
    /// `e^{−f}(ℍ − ½(D(f∘π))^⊥)`, the trace of `𝔹̂ = 𝔹 − ½F ⊗ (D(f∘π))^⊥`.
    pub predicted: Vec<f64>,
    /// `ξ(u) − (2n²/(2n+1)) μ u` with `u = e^{f/(p−2)}`, `p = 2 + 2/n`.
    pub boundary_condition: f64,
    /// `μ = g(H, ξ)`.
    pub mu: f64,
}

impl ConformalShiftReport {
    pub fn deviation(&self) -> f64 {
        crate::linalg::max_abs(&crate::linalg::sub(&self.mean_curvature, &self.predicted))
    }
}

pub fn conformal_shift<F: ScalarField + ?Sized>(model: &TBoundary, f: &F, u: &[f64], gamma: f64) -> Result<ConformalShiftReport> {
    let p = check_model(model, u)?;
    let n = model.n();
    let mut v = u.to_vec();
    v.push(gamma);
    let metric = |y: &[Hd]| {
        let s = f.eval(&y[..y.len() - 1]).exp();
        fefferman_metric_coords(y).into_iter().map(|g| g * s).collect::<Vec<_>>()
    };
    let hat = chart_sff(&metric, &model.lifted_embed(), &v)?;
    let mean_curvature = hat.mean_curvature();

    let base = chart_sff(&fefferman_field(), &model.lifted_embed(), &v)?;
    let h = base.mean_curvature();
    let cp = CirclePoint::new(p.clone(), gamma);
    let fm = fefferman_metric(&cp);
    let mut df = gradient(f, &p.coords());
    df.push(0.0);
    let grad = fm.inverse().expect("F is nondegenerate").mul_vec(&df);
    let nu = f_normal(model, &cp);
    let nn = fm.bilinear(&nu, &nu);
    let coef = fm.bilinear(&grad, &nu) / nn;
    let ef = libm::exp(crate::field::value(f, &p.coords()));
    let predicted: Vec<f64> = h.iter().zip(&nu).map(|(hk, nk)| (hk - 0.5 * coef * nk) / ef).collect();

    let (_, _, xv, _) = point_and_frame(model, u);
    let im = Immersion::new(|y: &[Hd]| model.embed(y), 2 * n, n)?;
    let hv = mean_curvature_vector(&im, u)?;
    let g = webster_metric(&p);
    let mu = g.bilinear(&hv.0, &xv.0);
    let expo = n as f64 / 2.0;
    let uval = libm::exp(expo * crate::field::value(f, &p.coords()));
    let xi_u = expo * dot(&gradient(f, &p.coords()), &xv.0) * uval;
    let k = 2.0 * (n * n) as f64 / (2.0 * n as f64 + 1.0);
    Ok(ConformalShiftReport { mean_curvature, predicted, boundary_condition: xi_u - k * mu * uval, mu })
}

/// Residuals of the lift identities for the second fundamental forms.
#[derive(Clone, Debug, PartialEq)]
pub struct UmbilicityReport {
    /// Max `|𝔹(X↑,Y↑) − B(X,Y)↑|`.
    pub sff1: f64,
    /// Max `|𝔹(X↑,T↑) − B(X,T)↑ − g(X,Jξ)ξ↑|`.
    pub sff2: f64,
    /// Max `|𝔹(X↑,Ŝ) + g(X,Jξ)ξ↑|`.
    pub sff3: f64,
    /// `|𝔹(T↑,Ŝ)|`.
    pub sff3_t: f64,
    /// `F(𝔹((Jξ)↑,Ŝ), 𝔹((Jξ)↑,Ŝ))^{1/2}` while `F((Jξ)↑,Ŝ) = 0`; nonzero means nonumbilic.
    pub witness: f64,
    pub witness_pairing: f64,
}

pub fn umbilicity_probe(model: &TBoundary, u: &[f64], gamma: f64) -> Result<UmbilicityReport> {
    let p = check_model(model, u)?;
    let n = model.n();
    let mut v = u.to_vec();
    v.push(gamma);
    let big = chart_sff(&fefferman_field(), &model.lifted_embed(), &v)?;
    let small = chart_sff(&|y: &[Hd]| webster_metric_coords(y), &|y: &[Hd]| model.embed(y), u)?;
    let (_, ev, xv, _) = point_and_frame(model, u);
    let g = webster_metric(&p);
    let jxi = apply_j(&p, &xv);
    let xi_up = horizontal_lift(&xv);
    let t = TangentVector::basis(n, 2 * n);
    let t_up = horizontal_lift(&t);
    let sh = s_hat(n);
    let diff = |a: &[f64], b: &[f64]| crate::linalg::max_abs(&crate::linalg::sub(a, b));
    let (mut sff1, mut sff2, mut sff3) = (0.0f64, 0.0f64, 0.0f64);
    for x in &ev {
        let xu = horizontal_lift(x);
        let gx = g.bilinear(&x.0, &jxi.0);
        for y in &ev {
            let want = horizontal_lift(&TangentVector(small.eval(&x.0, &y.0)));
            sff1 = sff1.max(diff(&big.eval(&xu, &horizontal_lift(y)), &want));
        }
        let mut want = horizontal_lift(&TangentVector(small.eval(&x.0, &t.0)));
        for (w, z) in want.iter_mut().zip(&xi_up) {
            *w += gx * z;
        }
        sff2 = sff2.max(diff(&big.eval(&xu, &t_up), &want));
        let want: Vec<f64> = xi_up.iter().map(|z| -gx * z).collect();
        sff3 = sff3.max(diff(&big.eval(&xu, &sh), &want));
    }
    let sff3_t = crate::linalg::max_abs(&big.eval(&t_up, &sh));
    let cp = CirclePoint::new(p, gamma);
    let f = fefferman_metric(&cp);
    let ju = horizontal_lift(&jxi);
    let b = big.eval(&ju, &sh);
    Ok(UmbilicityReport {
        sff1,
        sff2,
        sff3,
        sff3_t,
        witness: libm::sqrt(f.bilinear(&b, &b).abs()),
        witness_pairing: f.bilinear(&ju, &sh),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn gamma_wraps() {
        let cp = CirclePoint::new(HPoint::origin(1), -0.5);
        assert!((cp.gamma - (TAU - 0.5)).abs() < 1e-15);
        assert!((CirclePoint::new(HPoint::origin(1), 7.0).gamma - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn fibre_is_null() {
        let cp = CirclePoint::new(HPoint::new(vec![Complex64::new(0.3, -0.2)], 0.7), 1.0);
        let f = fefferman_metric(&cp);
        let s = s_vector(1);
        let t = horizontal_lift(&TangentVector::basis(1, 2));
        assert_eq!(f.bilinear(&s, &s), 0.0);
        assert!((f.bilinear(&t, &s) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn origin_null_space_is_fibre() {
        let ns = boundary_null_space(&CirclePoint::new(HPoint::origin(2), 0.0), 1e-8).unwrap();
        assert_eq!(ns.dim, 1);
        assert!((ns.basis[0][4].abs() - 1.0).abs() < 1e-12);
        assert!(boundary_null_space(&CirclePoint::new(HPoint::new(vec![Complex64::new(0.0, 0.0)], 1.0), 0.0), 1e-8).is_err());
    }
}
