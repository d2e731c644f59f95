//! Minimal surfaces from holomorphic polynomial data.
//!
//! Data `Φ = (Φ¹..Φ^{2n}, Φ⁰)` is stored in coordinate order, so index `2n`
//! holds the `t`-component `Φ⁰`. The surface is `Ψ^A = 2 Re ∫_o^z Φ^A`,
//! which makes `∂Ψ^A/∂z = Φ^A` exactly.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Constraint, Error, Result};
use crate::field::Hd;
use crate::heis::{apply_j, HPoint};
use crate::immersions::{conformality_residuals, surface_char_decomposition, surface_pde_residual, SurfaceChart};
use crate::scalar::{Cx, Scalar};

/// Complex polynomial `Σ c_k ζ^k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Self(vec![c])
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, power: usize, c: Complex64) {
        if self.0.len() <= power {
            self.0.resize(power + 1, Complex64::new(0.0, 0.0));
        }
        self.0[power] = c;
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + 1];
        for (k, c) in self.0.iter().enumerate() {
            out[k + 1] = c / (k + 1) as f64;
        }
        Poly(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    pub fn eval_generic<S: Scalar>(&self, z: Cx<S>) -> Cx<S> {
        self.0
            .iter()
            .rev()
            .fold(Cx::cst(0.0, 0.0), |acc: Cx<S>, c| acc * z + Cx::cst(c.re, c.im))
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let len = self.0.len().max(o.0.len());
        let get = |p: &Poly, k: usize| p.0.get(k).copied().unwrap_or_default();
        Poly((0..len).map(|k| get(self, k) + get(o, k)).collect())
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDomain("rectangle must satisfy x0 < x1 and y0 < y1"));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
}

/// Weierstrass data on a rectangle with base point `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloMap {
    pub n: usize,
    /// `2n + 1` components in coordinate order; the last is `Φ⁰`.
    pub comps: Vec<Poly>,
    pub base: Complex64,
    pub domain: Rect,
}

impl HoloMap {
    pub fn zero(n: usize) -> Self {
        Self { n, comps: vec![Poly::zero(); 2 * n + 1], base: Complex64::new(0.0, 0.0), domain: Rect::unit() }
    }

    /// Vertical plane `Ψ = (x, 0, √2 y)` in `H₁`: `Φ = (½, 0, −i/√2)`.
    pub fn vertical_plane() -> Self {
        let mut h = Self::zero(1);
        h.comps[0] = Poly::constant(Complex64::new(0.5, 0.0));
        h.comps[2] = Poly::constant(Complex64::new(0.0, -core::f64::consts::FRAC_1_SQRT_2));
        h
    }

    /// Component by external index: `0` is `Φ⁰`, `1..=2n` are `Φ¹..Φ^{2n}`.
    pub fn component_mut(&mut self, index: usize) -> Option<&mut Poly> {
        let n = self.n;
        match index {
            0 => self.comps.get_mut(2 * n),
            k if k <= 2 * n => self.comps.get_mut(k - 1),
            _ => None,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.comps.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// Rotation by `β` in the `(Ψ^{j}, Ψ^{j+n})` plane, i.e. `F^j ↦ e^{iβ}F^j`.
    /// This is a CR automorphism, so constraints are preserved.
    pub fn rotate(&self, j: usize, beta: f64) -> Self {
        let (c, s) = (libm::cos(beta), libm::sin(beta));
        let mut out = self.clone();
        let a = &self.comps[j];
        let b = &self.comps[j + self.n];
        out.comps[j] = a.scale(Complex64::new(c, 0.0)).add(&b.scale(Complex64::new(-s, 0.0)));
        out.comps[j + self.n] = a.scale(Complex64::new(s, 0.0)).add(&b.scale(Complex64::new(c, 0.0)));
        out
    }

    pub fn phi(&self, z: Complex64) -> Vec<Complex64> {
        self.comps.iter().map(|p| p.eval(z)).collect()
    }

    /// `Ψ` on generic scalars, for derivative oracles.
    pub fn psi_generic<S: Scalar>(&self, x: S, y: S) -> Vec<S> {
        let z = Cx::new(x, y);
        let o = self.base;
        self.comps
            .iter()
            .map(|p| {
                let q = p.integral();
                let v = q.eval_generic(z);
                let v0 = q.eval(o);
                (v.re - v0.re) * 2.0
            })
            .collect()
    }

    /// The surface as a chart usable by the immersion code.
    pub fn chart(&self) -> SurfaceChart<impl Fn(&[Hd]) -> Vec<Hd> + '_> {
        SurfaceChart::new(move |u: &[Hd]| self.psi_generic(u[0], u[1]), self.n)
    }
}

/// `Ψ(z) = 2 Re ∫_o^z Φ`.
pub fn integrate_data(h: &HoloMap, z: Complex64) -> HPoint {
    HPoint::from_coords(&h.psi_generic(z.re, z.im))
}

/// `K = θ₀(∂Ψ/∂z) = Φ⁰ + 2Σ(Ψ^jΦ^{j+n} − Ψ^{j+n}Φ^j)`.
pub fn compute_k(h: &HoloMap, z: Complex64) -> Complex64 {
    let n = h.n;
    let phi = h.phi(z);
    let psi = h.psi_generic(z.re, z.im);
    let mut k = phi[2 * n];
    for j in 0..n {
        k += (phi[j + n] * psi[j] - phi[j] * psi[j + n]) * 2.0;
    }
    k
}

/// Constraint values at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointConstraints {
    /// `2Σ((Φ^j)² + (Φ^{j+n})²) + K²`.
    pub isotropy: Complex64,
    /// `2Σ(|Φ^j|² + |Φ^{j+n}|²) + |K|²`.
    pub nondegeneracy: f64,
    /// `max_j |K̄(Φ^j + iΦ^{j+n}) + K(Φ̄^j + iΦ̄^{j+n})|`.
    pub tangency: f64,
}

pub fn point_constraints(h: &HoloMap, z: Complex64) -> PointConstraints {
    let n = h.n;
    let phi = h.phi(z);
    let k = compute_k(h, z);
    let i = Complex64::new(0.0, 1.0);
    let mut iso = k * k;
    let mut nd = k.norm_sqr();
    let mut tan = 0.0f64;
    for j in 0..n {
        let (a, b) = (phi[j], phi[j + n]);
        iso += (a * a + b * b) * 2.0;
        nd += 2.0 * (a.norm_sqr() + b.norm_sqr());
        let r = k.conj() * (a + i * b) + k * (a.conj() + i * b.conj());
        tan = tan.max(r.norm());
    }
    PointConstraints { isotropy: iso, nondegeneracy: nd, tangency: tan }
}

/// Uniform sample grid over a rectangle, endpoints included, row-major in `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { nx, ny })
    }

    pub fn points(&self, r: &Rect) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = r.y0 + (r.y1 - r.y0) * j as f64 / (self.ny - 1) as f64;
            for i in 0..self.nx {
                let x = r.x0 + (r.x1 - r.x0) * i as f64 / (self.nx - 1) as f64;
                out.push(Complex64::new(x, y));
            }
        }
        out
    }

    /// Counterclockwise triangles (zero-based vertex indices).
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(2 * (self.nx - 1) * (self.ny - 1));
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                let k = j * self.nx + i;
                out.push([k, k + 1, k + self.nx + 1]);
                out.push([k, k + self.nx + 1, k + self.nx]);
            }
        }
        out
    }
}

/// Pointwise constraint fields and their extremes.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub isotropy: Vec<f64>,
    pub nondegeneracy: Vec<f64>,
    pub tangency: Vec<f64>,
    pub max_isotropy: f64,
    pub min_nondegeneracy: f64,
    pub max_tangency: f64,
}

impl ConstraintReport {
    /// First failing constraint at tolerance `tol`, if any.
    pub fn failure(&self, tol: f64) -> Option<(Constraint, f64)> {
        if !(self.min_nondegeneracy > tol) {
            Some((Constraint::Nondegeneracy, self.min_nondegeneracy))
        } else if !(self.max_isotropy <= tol) {
            Some((Constraint::Isotropy, self.max_isotropy))
        } else if !(self.max_tangency <= tol) {
            Some((Constraint::Tangency, self.max_tangency))
        } else {
            None
        }
    }

    pub fn pass(&self, tol: f64) -> bool {
        self.failure(tol).is_none()
    }
}

pub fn constraint_residuals(h: &HoloMap, grid: &Grid) -> ConstraintReport {
    let pts = grid.points(&h.domain);
    let vals: Vec<PointConstraints> = pts.iter().map(|&z| point_constraints(h, z)).collect();
    let isotropy: Vec<f64> = vals.iter().map(|v| v.isotropy.norm()).collect();
    let nondegeneracy: Vec<f64> = vals.iter().map(|v| v.nondegeneracy).collect();
    let tangency: Vec<f64> = vals.iter().map(|v| v.tangency).collect();
    ConstraintReport {
        max_isotropy: isotropy.iter().fold(0.0, |m, v| f64::max(m, *v)),
        min_nondegeneracy: nondegeneracy.iter().fold(f64::INFINITY, |m, v| f64::min(m, *v)),
        max_tangency: tangency.iter().fold(0.0, |m, v| f64::max(m, *v)),
        isotropy,
        nondegeneracy,
        tangency,
    }
}

pub const CERTIFICATION_TOL: f64 = 1e-8;

/// Residuals measured on the generated surface.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certification {
    pub max_pde_residual: f64,
    pub max_conformality: f64,
    pub min_conformal_factor: f64,
    pub max_jt_perp: f64,
    /// `max |∂Ψ/∂z − Φ|`.
    pub max_phi_mismatch: f64,
    /// `max |∂Φ/∂z̄|`, from `¼ΔΨ`.
    pub max_antiholomorphic: f64,
}

impl Certification {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_pde_residual <= tol
            && self.max_conformality <= tol
            && self.min_conformal_factor > tol
            && self.max_jt_perp <= tol
            && self.max_phi_mismatch <= tol
            && self.max_antiholomorphic <= tol
    }
}

/// Sampled surface with its per-point residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub n: usize,
    pub grid: Grid,
    pub params: Vec<Complex64>,
    pub points: Vec<Vec<f64>>,
    pub pde_residual: Vec<f64>,
    pub conformality: Vec<f64>,
    pub constraints: ConstraintReport,
    pub certification: Certification,
}

/// Build and certify the surface. Fails with the first violated constraint at
/// tolerance `tol`.
pub fn generate_surface(h: &HoloMap, grid: &Grid, tol: f64) -> Result<Surface> {
    let constraints = constraint_residuals(h, grid);
    if let Some((constraint, value)) = constraints.failure(tol) {
        return Err(Error::ConstraintsViolated { constraint, value });
    }
    let chart = h.chart();
    let params = grid.points(&h.domain);
    let mut points = Vec::with_capacity(params.len());
    let mut pde = Vec::with_capacity(params.len());
    let mut conf = Vec::with_capacity(params.len());
    let mut cert = Certification { min_conformal_factor: f64::INFINITY, ..Default::default() };
    for &z in &params {
        let jet = chart.jet(z);
        let (fr, tr) = surface_pde_residual(&chart, z);
        let r = fr.iter().fold(tr.abs(), |m, c| m.max(c.norm()));
        let (r1, r2) = conformality_residuals(&chart, z);
        let phi = h.phi(z);
        let mism = jet.phi.iter().zip(&phi).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        let anti = jet.psi_zzbar.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let p = HPoint::from_coords(&jet.psi);
        let jt = surface_char_decomposition(&chart, z).map(|d| apply_j(&p, &d.normal).max_abs()).unwrap_or(f64::INFINITY);
        cert.max_pde_residual = cert.max_pde_residual.max(r);
        cert.max_conformality = cert.max_conformality.max(r1.norm());
        cert.min_conformal_factor = cert.min_conformal_factor.min(r2);
        cert.max_jt_perp = cert.max_jt_perp.max(jt);
        cert.max_phi_mismatch = cert.max_phi_mismatch.max(mism);
        cert.max_antiholomorphic = cert.max_antiholomorphic.max(anti);
        points.push(jet.psi);
        pde.push(r);
        conf.push(r1.norm());
    }
    Ok(Surface { n: h.n, grid: *grid, params, points, pde_residual: pde, conformality: conf, constraints, certification: cert })
}
