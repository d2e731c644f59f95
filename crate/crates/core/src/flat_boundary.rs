//! Closed-form geometry of the two flat model boundaries.
//!
//! * `∂Hₙ⁺ = Cⁿ × {0}` with intrinsic coordinates `(x¹..xⁿ, y¹..yⁿ)`.
//! * `N = {yⁿ = 0}` in `R^{2n}₊ × R` with intrinsic coordinates
//!   `(x¹..xⁿ, y¹..y^{n−1}, t)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::diffops::{levi_civita_christoffels, metric_christoffels, Christoffels};
use crate::field::{hessian, Hd, ScalarField};
use crate::heis::{webster_metric, webster_metric_coords, HPoint, TangentVector};
use crate::linalg::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub z: Vec<Complex64>,
}

impl BoundaryPoint {
    pub fn new(z: Vec<Complex64>) -> Self {
        Self { z }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `c = 1/(1 + 2|z|²)`.
    pub fn c(&self) -> f64 {
        1.0 / (1.0 + 2.0 * self.z.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Intrinsic coordinates `(x, y)`.
    pub fn coords(&self) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; 2 * n];
        for (j, z) in self.z.iter().enumerate() {
            c[j] = z.re;
            c[j + n] = z.im;
        }
        c
    }

    pub fn to_hpoint(&self) -> HPoint {
        HPoint::new(self.z.clone(), 0.0)
    }
}

/// Induced metric on `∂Hₙ⁺`, generic for differentiation.
pub fn boundary_metric_coords<S: Scalar>(c: &[S]) -> Vec<S> {
    let n = c.len() / 2;
    let mut amb = c.to_vec();
    amb.push(S::zero());
    let g = webster_metric_coords(&amb);
    let d = 2 * n + 1;
    let mut out = Vec::with_capacity(4 * n * n);
    for a in 0..2 * n {
        for b in 0..2 * n {
            out.push(g[a * d + b]);
        }
    }
    out
}

/// Metric and closed-form cometric of `∂Hₙ⁺`:
/// `g^{-1} = [[½δ − c yy, c y x], [c x y, ½δ − c xx]]`.
pub fn boundary_metric(q: &BoundaryPoint) -> (Mat, Mat) {
    let n = q.n();
    let c = q.c();
    let co = q.coords();
    let g = Mat { rows: 2 * n, cols: 2 * n, data: boundary_metric_coords(&co) };
    let (x, y) = (&co[..n], &co[n..]);
    let mut inv = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let dl = if i == j { 0.5 } else { 0.0 };
            inv[(i, j)] = dl - c * (y[i] * y[j]);
            inv[(i + n, j + n)] = dl - c * (x[i] * x[j]);
            inv[(i, j + n)] = c * y[i] * x[j];
            inv[(j + n, i)] = c * y[i] * x[j];
        }
    }
    (g, inv)
}

/// Closed-form Levi-Civita coefficients of `∂Hₙ⁺`.
pub fn boundary_christoffels(q: &BoundaryPoint) -> Christoffels {
    let n = q.n();
    let c = q.c();
    let co = q.coords();
    let (x, y) = (&co[..n], &co[n..]);
    let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut g = Christoffels::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let s_ij = y[i] * x[j] + y[j] * x[i];
            let p_ij = y[i] * y[j] - x[i] * x[j];
            let q_ij = x[i] * y[j] + x[j] * y[i];
            for k in 0..n {
                g.set(k, i, j, -4.0 * c * s_ij * y[k]);
                g.set(k + n, i + n, j + n, -4.0 * c * q_ij * x[k]);
                g.set(k + n, i, j, 4.0 * c * s_ij * x[k] - 2.0 * (y[i] * dl(j, k) + y[j] * dl(i, k)));
                let a = 2.0 * y[i] * dl(j, k) - 4.0 * c * p_ij * y[k];
                g.set(k, i, j + n, a);
                g.set(k, j + n, i, a);
                let b = 2.0 * x[j] * dl(i, k) + 4.0 * c * p_ij * x[k];
                g.set(k + n, i, j + n, b);
                g.set(k + n, j + n, i, b);
                g.set(k, i + n, j + n, -2.0 * (x[i] * dl(j, k) + x[j] * dl(i, k)) + 4.0 * c * q_ij * y[k]);
            }
        }
    }
    g
}

/// Christoffels of [`boundary_metric`] from metric derivatives.
pub fn boundary_christoffels_numeric(q: &BoundaryPoint) -> Christoffels {
    metric_christoffels(&|c: &[Hd]| boundary_metric_coords(c), &q.coords())
}

/// Raw normal `ξ = T + √2 yʲX_j − √2 xʲY_j = Σ(y_j∂_{x_j} − x_j∂_{y_j}) + (1/c)∂_t`.
pub fn raw_normal(q: &BoundaryPoint) -> TangentVector {
    let n = q.n();
    let mut v = TangentVector::zeros(n);
    for (j, z) in q.z.iter().enumerate() {
        v.0[j] = z.im;
        v.0[j + n] = -z.re;
    }
    v.0[2 * n] = 1.0 / q.c();
    v
}

/// Second fundamental form coefficients `B(∂_a, ∂_b) = β_{ab} ξ` (raw `ξ`).
pub fn boundary_sff(q: &BoundaryPoint) -> Mat {
    let n = q.n();
    let c = q.c();
    let co = q.coords();
    let (x, y) = (&co[..n], &co[n..]);
    let mut b = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = 4.0 * c * (y[i] * x[j] + y[j] * x[i]);
            let m = 4.0 * c * (y[i] * y[j] - x[i] * x[j]);
            b[(i, j + n)] = m;
            b[(j + n, i)] = m;
            b[(i + n, j + n)] = -4.0 * c * (x[i] * y[j] + x[j] * y[i]);
        }
    }
    b
}

/// Mean curvature vector `H = (1/2n) g^{ab} B(∂_a,∂_b)`, in ambient coordinates.
pub fn boundary_mean_curvature(q: &BoundaryPoint) -> TangentVector {
    let n = q.n();
    let (_, ginv) = boundary_metric(q);
    let b = boundary_sff(q);
    let tr: f64 = (0..2 * n).flat_map(|a| (0..2 * n).map(move |c| (a, c))).map(|(a, c)| ginv[(a, c)] * b[(a, c)]).sum();
    raw_normal(q).scale(tr / (2.0 * n as f64))
}

/// `D⁰_{∂_a}∂_b − Γ^c_{ab}∂_c` from the ambient connection (Gauss formula).
pub fn gauss_normal_part(q: &BoundaryPoint, a: usize, b: usize) -> TangentVector {
    let n = q.n();
    let amb = levi_civita_christoffels(&q.to_hpoint());
    let gam = boundary_christoffels(q);
    let mut v = TangentVector::zeros(n);
    for cidx in 0..2 * n + 1 {
        v.0[cidx] = amb.get(cidx, a, b);
    }
    for cidx in 0..2 * n {
        v.0[cidx] -= gam.get(cidx, a, b);
    }
    v
}

/// Laplace–Beltrami operator of `∂Hₙ⁺` in closed form:
/// `½Δ₀u + 2c ∂u/∂r − c{yⁱyʲu_{xx} − 2yⁱxʲu_{xy} + xⁱxʲu_{yy}}`.
pub fn boundary_laplacian<F: ScalarField + ?Sized>(u: &F, q: &BoundaryPoint) -> f64 {
    let n = q.n();
    let c = q.c();
    let co = q.coords();
    let (_, g, h) = hessian(u, &co);
    let (x, y) = (&co[..n], &co[n..]);
    let mut lap0 = 0.0;
    let mut radial = 0.0;
    for a in 0..2 * n {
        lap0 += h[(a, a)];
        radial += co[a] * g[a];
    }
    let mut brace = 0.0;
    for i in 0..n {
        for j in 0..n {
            brace += y[i] * y[j] * h[(i, j)] - 2.0 * y[i] * x[j] * h[(i, j + n)] + x[i] * x[j] * h[(i + n, j + n)];
        }
    }
    0.5 * lap0 + 2.0 * c * radial - c * brace
}

/// Generic Laplace–Beltrami `g^{ab}(u_{ab} − Γ^c_{ab}u_c)` from a cometric and
/// connection coefficients.
pub fn laplace_beltrami(ginv: &Mat, gam: &Christoffels, grad: &[f64], hess: &Mat) -> f64 {
    let d = ginv.rows;
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut v = hess[(a, b)];
            for c in 0..d {
                v -= gam.get(c, a, b) * grad[c];
            }
            s += ginv[(a, b)] * v;
        }
    }
    s
}

/// `T = Tᵀ + T^⊥` on `∂Hₙ⁺`.
#[derive(Clone, Debug)]
pub struct CharacteristicSplit {
    pub tangential: TangentVector,
    pub normal: TangentVector,
    pub xi: TangentVector,
    pub xi_unit: TangentVector,
}

pub fn characteristic_split(q: &BoundaryPoint) -> CharacteristicSplit {
    let n = q.n();
    let c = q.c();
    let xi = raw_normal(q);
    let normal = xi.scale(c);
    let tangential = TangentVector::basis(n, 2 * n).sub(&normal);
    let xi_unit = xi.scale(libm::sqrt(c));
    CharacteristicSplit { tangential, normal, xi, xi_unit }
}

/// Coefficients `(a, b)` of `Tᵀ = aʲ(X_j − √2y_jT) + bʲ(Y_j + √2x_jT)`:
/// `aʲ = −√2yʲc`, `bʲ = √2xʲc`.
pub fn tangential_coefficients(q: &BoundaryPoint) -> (Vec<f64>, Vec<f64>) {
    let c = q.c();
    let s = core::f64::consts::SQRT_2;
    (q.z.iter().map(|z| -s * z.im * c).collect(), q.z.iter().map(|z| s * z.re * c).collect())
}

/// Coordinates on `N = {yⁿ = 0}`: `u = (x¹..xⁿ, y¹..y^{n−1}, t)`.
pub mod halfspace {
    use super::*;

    /// Ambient coordinates of an intrinsic point.
    pub fn embed<S: Scalar>(u: &[S]) -> Vec<S> {
        let n = u.len() / 2;
        let mut p = Vec::with_capacity(2 * n + 1);
        p.extend_from_slice(&u[..2 * n - 1]);
        p.push(S::zero());
        p.push(u[2 * n - 1]);
        p
    }

    /// Ambient index of intrinsic coordinate `a`.
    pub fn ambient_index(n: usize, a: usize) -> usize {
        if a < 2 * n - 1 {
            a
        } else {
            2 * n
        }
    }

    pub fn metric_coords<S: Scalar>(u: &[S]) -> Vec<S> {
        let n = u.len() / 2;
        let d = 2 * n + 1;
        let g = webster_metric_coords(&embed(u));
        let mut out = Vec::with_capacity(4 * n * n);
        for a in 0..2 * n {
            for b in 0..2 * n {
                out.push(g[ambient_index(n, a) * d + ambient_index(n, b)]);
            }
        }
        out
    }

    pub fn metric(u: &[f64]) -> Mat {
        let m = u.len();
        Mat { rows: m, cols: m, data: metric_coords(u) }
    }

    /// Closed-form cometric on `N`. Blocks: `½δ` on the n x's, `½δ` on the
    /// n−1 y's, `yⁱ` on x–t, `−x^α` on y–t (α < n), and corner
    /// `1 + 2|x′|² + 2|y|²` with `x′ = (x¹..x^{n−1})`.
    pub fn cometric(u: &[f64]) -> Mat {
        let n = u.len() / 2;
        let t = 2 * n - 1;
        let mut m = Mat::zeros(2 * n, 2 * n);
        let mut corner = 1.0;
        for i in 0..n {
            m[(i, i)] = 0.5;
            let yi = if i < n - 1 { u[n + i] } else { 0.0 };
            m[(i, t)] = yi;
            m[(t, i)] = yi;
            corner += 2.0 * yi * yi;
        }
        for a in 0..n - 1 {
            m[(n + a, n + a)] = 0.5;
            m[(n + a, t)] = -u[a];
            m[(t, n + a)] = -u[a];
            corner += 2.0 * u[a] * u[a];
        }
        m[(t, t)] = corner;
        m
    }

    /// Normal `ξ = ∂_{yⁿ} − 2xₙT`, `‖ξ‖² = 2`.
    pub fn normal(u: &[f64]) -> TangentVector {
        let n = u.len() / 2;
        let mut v = TangentVector::zeros(n);
        v.0[2 * n - 1] = 1.0;
        v.0[2 * n] = -2.0 * u[n - 1];
        v
    }

    /// Closed-form second fundamental form `B(∂_a,∂_b) = β_{ab} ξ`.
    pub fn sff(u: &[f64]) -> Mat {
        let n = u.len() / 2;
        let t = 2 * n - 1;
        let xn = n - 1;
        let mut b = Mat::zeros(2 * n, 2 * n);
        let mut set = |a: usize, c: usize, v: f64| {
            b[(a, c)] = v;
            b[(c, a)] = v;
        };
        // B(∂xⁿ,∂xⁿ) = −4yₙξ with yₙ = 0 on N
        set(xn, xn, 0.0);
        for a in 0..n - 1 {
            set(a, xn, -2.0 * u[n + a]);
            set(xn, n + a, 2.0 * u[a]);
        }
        set(xn, t, 1.0);
        b
    }

    /// `2n H = g^{ab}B(∂_a,∂_b)`, returned as the ambient mean curvature vector.
    pub fn mean_curvature(u: &[f64]) -> TangentVector {
        let n = u.len() / 2;
        let gi = cometric(u);
        let b = sff(u);
        let tr: f64 = (0..2 * n).flat_map(|a| (0..2 * n).map(move |c| (a, c))).map(|(a, c)| gi[(a, c)] * b[(a, c)]).sum();
        normal(u).scale(tr / (2.0 * n as f64))
    }

    /// Gauss-formula coefficient `g(D⁰_{∂_a}∂_b, ξ)/‖ξ‖²`.
    pub fn sff_gauss(u: &[f64]) -> Mat {
        let n = u.len() / 2;
        let amb = embed(u);
        let p = HPoint::from_coords(&amb);
        let g = webster_metric(&p);
        let gam = levi_civita_christoffels(&p);
        let xi = normal(u);
        let xx = g.bilinear(&xi.0, &xi.0);
        Mat::from_fn(2 * n, 2 * n, |a, b| {
            let (ia, ib) = (ambient_index(n, a), ambient_index(n, b));
            let d: Vec<f64> = (0..2 * n + 1).map(|c| gam.get(c, ia, ib)).collect();
            g.bilinear(&d, &xi.0) / xx
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_values() {
        let q = BoundaryPoint::new(vec![c(0.0, 0.0); 2]);
        let (_, inv) = boundary_metric(&q);
        assert_eq!(inv, Mat::from_fn(4, 4, |i, j| if i == j { 0.5 } else { 0.0 }));
        assert!(boundary_christoffels(&q).data.iter().all(|&v| v == 0.0));
        let s = characteristic_split(&q);
        assert_eq!(s.tangential.max_abs(), 0.0);
    }

    #[test]
    fn real_z_has_no_xx_sff() {
        let q = BoundaryPoint::new(vec![c(0.4, 0.0), c(-1.2, 0.0)]);
        let b = boundary_sff(&q);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(b[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn halfspace_corner_and_xi() {
        let u = [0.3, -0.5, 0.7, 1.1];
        let g = halfspace::cometric(&u);
        assert!((g[(3, 3)] - (1.0 + 2.0 * 0.09 + 2.0 * 0.49)).abs() < 1e-15);
        assert_eq!(halfspace::sff(&u)[(1, 3)], 1.0);
    }
}
