//! Fields with a derivative oracle.
//!
//! Every field is evaluated on [`HyperDual`] inputs. Plain values, exact first
//! and second partials all come from seeding. A central-difference path with
//! step [`FD_STEP`] is kept as an independent check.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::scalar::{Cx, HyperDual};

pub type Hd = HyperDual;

pub const FD_STEP: f64 = 1e-5;

/// Real scalar field on a coordinate patch.
pub trait ScalarField {
    fn eval(&self, x: &[Hd]) -> Hd;
}

impl<F: Fn(&[Hd]) -> Hd + ?Sized> ScalarField for F {
    fn eval(&self, x: &[Hd]) -> Hd {
        self(x)
    }
}

/// Complex scalar field, returned as real and imaginary parts.
pub trait ComplexField {
    fn eval(&self, x: &[Hd]) -> Cx<Hd>;
}

impl<F: Fn(&[Hd]) -> Cx<Hd> + ?Sized> ComplexField for F {
    fn eval(&self, x: &[Hd]) -> Cx<Hd> {
        self(x)
    }
}

/// Vector-valued map, used for immersions and coefficient fields.
pub trait VectorMap {
    fn eval(&self, x: &[Hd]) -> Vec<Hd>;
}

impl<F: Fn(&[Hd]) -> Vec<Hd> + ?Sized> VectorMap for F {
    fn eval(&self, x: &[Hd]) -> Vec<Hd> {
        self(x)
    }
}

fn seed(x: &[f64], u: Option<&[f64]>, v: Option<&[f64]>) -> Vec<Hd> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            Hd::new(xi, u.map_or(0.0, |u| u[i]), v.map_or(0.0, |v| v[i]), 0.0)
        })
        .collect()
}

fn seed_axes(x: &[f64], i: usize, j: usize) -> Vec<Hd> {
    x.iter()
        .enumerate()
        .map(|(k, &xk)| {
            Hd::new(xk, if k == i { 1.0 } else { 0.0 }, if k == j { 1.0 } else { 0.0 }, 0.0)
        })
        .collect()
}

pub fn constants(x: &[f64]) -> Vec<Hd> {
    seed(x, None, None)
}

pub fn value<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> f64 {
    f.eval(&constants(x)).a
}

/// Directional derivative `v·∇f`.
pub fn directional<F: ScalarField + ?Sized>(f: &F, x: &[f64], v: &[f64]) -> f64 {
    f.eval(&seed(x, Some(v), None)).e1
}

/// `u^T (∇²f) v`.
pub fn second_directional<F: ScalarField + ?Sized>(f: &F, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    f.eval(&seed(x, Some(u), Some(v))).e12
}

pub fn gradient<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|i| f.eval(&seed_axes(x, i, usize::MAX)).e1).collect()
}

/// Value, gradient and Hessian from `d(d+1)/2` evaluations.
pub fn hessian<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> (f64, Vec<f64>, Mat) {
    let d = x.len();
    let mut g = vec![0.0; d];
    let mut h = Mat::zeros(d, d);
    let mut v0 = 0.0;
    for i in 0..d {
        for j in i..d {
            let r = f.eval(&seed_axes(x, i, j));
            v0 = r.a;
            if j == i {
                g[i] = r.e1;
            }
            h[(i, j)] = r.e12;
            h[(j, i)] = r.e12;
        }
    }
    if d == 0 {
        v0 = value(f, x);
    }
    (v0, g, h)
}

pub fn fd_gradient<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> Vec<f64> {
    let h = FD_STEP;
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (value(f, &p) - value(f, &m)) / (2.0 * h)
        })
        .collect()
}

pub fn fd_hessian<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> Mat {
    let h = FD_STEP;
    let d = x.len();
    let f0 = value(f, x);
    let at = |di: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(k, s) in di {
            p[k] += s;
        }
        value(f, &p)
    };
    let mut m = Mat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Complex analogue of [`hessian`]: `(value, gradient, hessian)` for real and
/// imaginary parts.
pub struct ComplexJet {
    pub value: Cx<f64>,
    pub grad: Vec<Cx<f64>>,
    pub hess_re: Mat,
    pub hess_im: Mat,
}

pub fn complex_jet<F: ComplexField + ?Sized>(f: &F, x: &[f64]) -> ComplexJet {
    let d = x.len();
    let mut grad = vec![Cx::new(0.0, 0.0); d];
    let mut hr = Mat::zeros(d, d);
    let mut hi = Mat::zeros(d, d);
    let mut v0 = f.eval(&constants(x)).to_c64();
    for i in 0..d {
        for j in i..d {
            let r = f.eval(&seed_axes(x, i, j));
            v0 = r.to_c64();
            if i == j {
                grad[i] = Cx::new(r.re.e1, r.im.e1);
            }
            hr[(i, j)] = r.re.e12;
            hr[(j, i)] = r.re.e12;
            hi[(i, j)] = r.im.e12;
            hi[(j, i)] = r.im.e12;
        }
    }
    ComplexJet { value: Cx::new(v0.re, v0.im), grad, hess_re: hr, hess_im: hi }
}

/// Value and first and second partials of a vector map.
/// `d1[α][A] = ∂_α Ψ^A`, `d2[α][β][A] = ∂_α∂_β Ψ^A`.
#[derive(Clone, Debug)]
pub struct MapJet {
    pub value: Vec<f64>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<Vec<f64>>>,
}

pub fn map_jet<F: VectorMap + ?Sized>(f: &F, x: &[f64]) -> MapJet {
    let m = x.len();
    let value: Vec<f64> = f.eval(&constants(x)).iter().map(|h| h.a).collect();
    let dim = value.len();
    let mut d1 = vec![vec![0.0; dim]; m];
    let mut d2 = vec![vec![vec![0.0; dim]; m]; m];
    for i in 0..m {
        for j in i..m {
            let r = f.eval(&seed_axes(x, i, j));
            for (k, h) in r.iter().enumerate() {
                if i == j {
                    d1[i][k] = h.e1;
                }
                d2[i][j][k] = h.e12;
                d2[j][i][k] = h.e12;
            }
        }
    }
    MapJet { value, d1, d2 }
}

/// Value and directional derivative of a vector map along `v`.
pub fn map_directional<F: VectorMap + ?Sized>(f: &F, x: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = f.eval(&seed(x, Some(v), None));
    (r.iter().map(|h| h.a).collect(), r.iter().map(|h| h.e1).collect())
}

pub fn map_value<F: VectorMap + ?Sized>(f: &F, x: &[f64]) -> Vec<f64> {
    f.eval(&constants(x)).iter().map(|h| h.a).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn sample(x: &[Hd]) -> Hd {
        (x[0] * x[1]).sin() + (x[2] * x[2] + 1.0).ln() * x[0] + x[1].exp() / (x[2] + 3.0)
    }

    #[test]
    fn ad_matches_central_differences() {
        let x = [0.4, -0.3, 0.9];
        let (_, g, h) = hessian(&sample, &x);
        let gf = fd_gradient(&sample, &x);
        let hf = fd_hessian(&sample, &x);
        for i in 0..3 {
            assert!((g[i] - gf[i]).abs() < 1e-8 * (1.0 + g[i].abs()));
            for j in 0..3 {
                let a = h[(i, j)];
                assert!((a - hf[(i, j)]).abs() <= 1e-4 * (1.0 + a.abs()), "{i}{j}");
            }
        }
        let u = [0.3, 1.0, -2.0];
        let v = [1.5, 0.0, 0.5];
        let hv = h.mul_vec(&v);
        let uhv: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
        assert!((second_directional(&sample, &x, &u, &v) - uhv).abs() < 1e-12);
    }
}
