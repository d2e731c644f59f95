//! Variational solver for the boundary CR Yamabe problem on an annular
//! cylinder `M = {r₀ ≤ |z| ≤ r₁} × (t mod L) ⊂ H₁`.
//!
//! Both boundary components are tangent to `T`. In cylindrical coordinates
//! `(ρ, α, t)`:
//!
//! * `‖∇^H u‖² = ½[u_ρ² + (u_α/ρ − 2ρu_t)²]`
//! * `Δ_b u = ½[u_ρρ + u_ρ/ρ + u_αα/ρ² − 4u_αt + 4ρ²u_tt]`
//! * `ω = θ₀ ∧ dθ₀ = 4ρ dρ dα dt`, boundary measure `dσ_bdry = √2 r dα dt`
//! * `ξ(u) = ±u_ρ/√2` for the outward unit normal.
//!
//! The quotient `Q = A/B` is minimized on `{B = 1}` over `u = e^w` with a
//! limited-memory BFGS iteration on the scale-free objective `A/B^{2/p}`.
//! At a constrained critical point `−b Δ_b u = Q u^{p−1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::field::{map_jet, Hd};
use crate::heis::{theta0_coeffs, webster_metric, HPoint};
use crate::immersions::{levelset_mean_curvature, pullback_metric, Immersion};
use crate::scalar::Scalar;

/// `p = 2 + 2/n`, `b_n = 2 + 2/n`, `a_n = 2^{n+2}(n+1)!n/(2n+1)`, `c_n = 2ⁿn!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YamabeConstants {
    pub n: usize,
    pub p: f64,
    pub b: f64,
    pub a: f64,
    pub c: f64,
}

fn factorial(k: u64) -> u128 {
    (1..=k as u128).product()
}

impl YamabeConstants {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let (an, ad) = Self::a_exact(n);
        Self {
            n,
            p: 2.0 + 2.0 / nf,
            b: 2.0 + 2.0 / nf,
            a: an as f64 / ad as f64,
            c: factorial(n as u64) as f64 * libm::pow(2.0, nf),
        }
    }

    /// `a_n` as an integer fraction.
    pub fn a_exact(n: usize) -> (u128, u128) {
        let n = n as u64;
        ((1u128 << (n + 2)) * factorial(n + 1) * n as u128, 2 * n as u128 + 1)
    }

    /// `b_n` as an integer fraction.
    pub fn b_exact(n: usize) -> (u128, u128) {
        (2 * n as u128 + 2, n as u128)
    }

    pub fn c_exact(n: usize) -> u128 {
        (1u128 << n) * factorial(n as u64)
    }

    /// `a_n/(b_n c_n) = 2n²/(2n+1)` by cross-multiplication in integers.
    pub fn ratio_identity_exact(n: usize) -> bool {
        let (an, ad) = Self::a_exact(n);
        let (bn, bd) = Self::b_exact(n);
        let c = Self::c_exact(n);
        let nn = n as u128;
        // an/ad · bd/(bn c) == 2n²/(2n+1)
        an * bd * (2 * nn + 1) == 2 * nn * nn * ad * bn * c
    }

    /// `a_n/(b_n c_n)`.
    pub fn robin(&self) -> f64 {
        self.a / (self.b * self.c)
    }
}

/// `{r₀ ≤ |z| ≤ r₁} × (t mod L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YamabeDomain {
    pub r0: f64,
    pub r1: f64,
    pub length: f64,
}

impl YamabeDomain {
    pub fn new(r0: f64, r1: f64, length: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidDomain("inner radius must be positive"));
        }
        if !(r1 > r0 && r1.is_finite()) {
            return Err(Error::InvalidDomain("outer radius must exceed inner radius"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidDomain("period must be positive"));
        }
        Ok(Self { r0, r1, length })
    }

    pub fn radius(&self, c: Component) -> f64 {
        match c {
            Component::Inner => self.r0,
            Component::Outer => self.r1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Inner,
    Outer,
}

/// `μ_θ = g(H, ξ)` on one boundary component with the outward normal, at angle `alpha`.
pub fn mu_theta_at(domain: &YamabeDomain, comp: Component, alpha: f64) -> Result<f64> {
    let r = domain.radius(comp);
    let s = match comp {
        Component::Inner => -1.0,
        Component::Outer => 1.0,
    };
    let phi = move |x: &[Hd]| (x[0] * x[0] + x[1] * x[1] - r * r) * s;
    let p = HPoint::new(vec![num_complex::Complex64::from_polar(r, alpha)], 0.0);
    Ok(levelset_mean_curvature(&phi, &p)?.mean)
}

pub fn mu_theta(domain: &YamabeDomain, comp: Component) -> Result<f64> {
    mu_theta_at(domain, comp, 0.0)
}

/// Coefficient of `θ₀ ∧ dθ₀` against `dx ∧ dy ∧ dt` on `H₁`.
pub fn omega_density(p: &HPoint) -> f64 {
    let x = p.coords();
    let jet = map_jet(&|y: &[Hd]| theta0_coeffs(y), &x);
    let th = theta0_coeffs(&x);
    let d = |a: usize, b: usize| jet.d1[a][b] - jet.d1[b][a];
    // (θ∧dθ)_{012} = θ₀ dθ_{12} + θ₁ dθ_{20} + θ₂ dθ_{01}
    th[0] * d(1, 2) + th[1] * d(2, 0) + th[2] * d(0, 1)
}

/// `√det g₀`.
pub fn volume_density(p: &HPoint) -> f64 {
    libm::sqrt(webster_metric(p).det())
}

/// `√det(i*g₀)` of the boundary cylinder in the chart `(α, t)`.
pub fn boundary_density(r: f64, alpha: f64) -> Result<f64> {
    let im = Immersion::new(move |u: &[Hd]| vec![u[0].cos() * r, u[0].sin() * r, u[1]], 2, 1)?;
    Ok(libm::sqrt(pullback_metric(&im, &[alpha, 0.0])?.det()))
}

/// Grid of `(nr + 1) × na × nt` nodes: `ρ_i = r₀ + i h`, `h = (r₁ − r₀)/nr`,
/// `α_j = 2πj/na`, `t_l = L l/nt`, periodic in `α` and `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YamabeGrid {
    pub nr: usize,
    pub na: usize,
    pub nt: usize,
}

impl YamabeGrid {
    pub fn new(nr: usize, na: usize, nt: usize) -> Result<Self> {
        if nr < 3 || na < 3 || nt < 3 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { nr, na, nt })
    }

    pub fn len(&self) -> usize {
        (self.nr + 1) * self.na * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idx(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.na + j) * self.nt + l
    }
}

/// Samples of `u` on a [`YamabeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: YamabeGrid,
    pub u: Vec<f64>,
}

impl GridFunction {
    pub fn constant(grid: YamabeGrid, v: f64) -> Self {
        Self { grid, u: vec![v; grid.len()] }
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.u[self.grid.idx(i, j, l)]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, u: self.u.iter().map(|v| v * c).collect() }
    }
}

/// `(A_θ, B_θ, Q_θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Functionals {
    pub a: f64,
    pub b: f64,
    pub q: f64,
}

/// Interior and boundary residuals of the Euler–Lagrange system
/// `−b Δ_b u − λu^{p−1} = 0`, `ξ(u) − (2n²/(2n+1))μ u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElResidual {
    /// Nodes `1 ≤ i ≤ nr − 1`, in grid order.
    pub interior: Vec<f64>,
    /// Inner component first, then outer, each `na × nt`.
    pub boundary: Vec<f64>,
}

impl ElResidual {
    pub fn max_interior(&self) -> f64 {
        self.interior.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_boundary(&self) -> f64 {
        self.boundary.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.max_interior().max(self.max_boundary())
    }
}

/// Discrete functionals on a fixed domain and grid.
///
/// `A_h` uses midpoint differences in `ρ` on each interval and central
/// differences in `(α, t)` at nodes with trapezoidal weights in `ρ`; `B_h`
/// uses trapezoidal weights. Both are exact on constants and second order.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub domain: YamabeDomain,
    pub grid: YamabeGrid,
    pub consts: YamabeConstants,
    pub h: f64,
    pub da: f64,
    pub dt: f64,
    pub rho: Vec<f64>,
    /// `ω`-weight of each radial node, `w_i · 4ρ_i · Δα Δt`.
    pub node_weight: Vec<f64>,
    pub mu_inner: f64,
    pub mu_outer: f64,
    pub sigma_bdry_inner: f64,
    pub sigma_bdry_outer: f64,
}

impl Discretization {
    pub fn new(domain: YamabeDomain, grid: YamabeGrid) -> Result<Self> {
        let h = (domain.r1 - domain.r0) / grid.nr as f64;
        let da = 2.0 * PI / grid.na as f64;
        let dt = domain.length / grid.nt as f64;
        let rho: Vec<f64> = (0..=grid.nr).map(|i| domain.r0 + h * i as f64).collect();
        let node_weight = rho
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let w = if i == 0 || i == grid.nr { 0.5 * h } else { h };
                w * 4.0 * r * da * dt
            })
            .collect();
        Ok(Self {
            domain,
            grid,
            consts: YamabeConstants::new(1),
            h,
            da,
            dt,
            rho,
            node_weight,
            mu_inner: mu_theta(&domain, Component::Inner)?,
            mu_outer: mu_theta(&domain, Component::Outer)?,
            sigma_bdry_inner: boundary_density(domain.r0, 0.0)? * da * dt,
            sigma_bdry_outer: boundary_density(domain.r1, 0.0)? * da * dt,
        })
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), found: u.u.len() });
        }
        Ok(())
    }

    fn wrap(k: isize, m: usize) -> usize {
        k.rem_euclid(m as isize) as usize
    }

    /// `u_α/ρ − 2ρu_t` by central differences at node `(i, j, l)`.
    fn angular(&self, u: &[f64], i: usize, j: usize, l: usize) -> f64 {
        let g = &self.grid;
        let (na, nt) = (g.na, g.nt);
        let jp = Self::wrap(j as isize + 1, na);
        let jm = Self::wrap(j as isize - 1, na);
        let lp = Self::wrap(l as isize + 1, nt);
        let lm = Self::wrap(l as isize - 1, nt);
        let ua = (u[g.idx(i, jp, l)] - u[g.idx(i, jm, l)]) / (2.0 * self.da);
        let ut = (u[g.idx(i, j, lp)] - u[g.idx(i, j, lm)]) / (2.0 * self.dt);
        ua / self.rho[i] - 2.0 * self.rho[i] * ut
    }

    /// Discrete `A_θ`, `B_θ` and `Q_θ`. Requires `u > 0`.
    pub fn functionals(&self, u: &GridFunction) -> Result<Functionals> {
        self.check(u)?;
        Ok(self.eval(&u.u, None))
    }

    fn eval(&self, u: &[f64], mut grad: Option<(&mut [f64], &mut [f64])>) -> Functionals {
        let g = self.grid;
        let k = self.consts;
        if let Some((ga, gb)) = grad.as_mut() {
            ga.iter_mut().for_each(|v| *v = 0.0);
            gb.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut a = 0.0;
        let mut b = 0.0;
        let cell = self.da * self.dt;
        for i in 0..=g.nr {
            for j in 0..g.na {
                for l in 0..g.nt {
                    let id = g.idx(i, j, l);
                    let w = self.node_weight[i];
                    let v = u[id];
                    b += w * v * v * v * v;
                    if let Some((_, gb)) = grad.as_mut() {
                        gb[id] += 4.0 * w * v * v * v;
                    }
                    if i < g.nr {
                        let mid = self.rho[i] + 0.5 * self.h;
                        let id1 = g.idx(i + 1, j, l);
                        let d = (u[id1] - v) / self.h;
                        let wr = self.h * 4.0 * mid * cell * 0.5 * k.b;
                        a += wr * d * d;
                        if let Some((ga, _)) = grad.as_mut() {
                            ga[id1] += 2.0 * wr * d / self.h;
                            ga[id] -= 2.0 * wr * d / self.h;
                        }
                    }
                    let q = self.angular(u, i, j, l);
                    let wq = w * 0.5 * k.b;
                    a += wq * q * q;
                    if let Some((ga, _)) = grad.as_mut() {
                        let s = 2.0 * wq * q;
                        let jp = Self::wrap(j as isize + 1, g.na);
                        let jm = Self::wrap(j as isize - 1, g.na);
                        let lp = Self::wrap(l as isize + 1, g.nt);
                        let lm = Self::wrap(l as isize - 1, g.nt);
                        let ca = s / (2.0 * self.da * self.rho[i]);
                        let ct = s * 2.0 * self.rho[i] / (2.0 * self.dt);
                        ga[g.idx(i, jp, l)] += ca;
                        ga[g.idx(i, jm, l)] -= ca;
                        ga[g.idx(i, j, lp)] -= ct;
                        ga[g.idx(i, j, lm)] += ct;
                    }
                }
            }
        }
        for (i, mu, sig) in [(0, self.mu_inner, self.sigma_bdry_inner), (g.nr, self.mu_outer, self.sigma_bdry_outer)] {
            for j in 0..g.na {
                for l in 0..g.nt {
                    let id = g.idx(i, j, l);
                    a -= k.a * mu * u[id] * u[id] * sig;
                    if let Some((ga, _)) = grad.as_mut() {
                        ga[id] -= 2.0 * k.a * mu * u[id] * sig;
                    }
                }
            }
        }
        Functionals { a, b, q: a / b }
    }

    /// Exact gradients `(∂A_h/∂u, ∂B_h/∂u)`.
    pub fn gradients(&self, u: &GridFunction) -> Result<(Functionals, Vec<f64>, Vec<f64>)> {
        self.check(u)?;
        let mut ga = vec![0.0; u.u.len()];
        let mut gb = vec![0.0; u.u.len()];
        let f = self.eval(&u.u, Some((&mut ga, &mut gb)));
        Ok((f, ga, gb))
    }

    fn d_rho(&self, u: &[f64], i: usize, j: usize, l: usize) -> (f64, f64) {
        let g = &self.grid;
        let at = |k: usize| u[g.idx(k, j, l)];
        let h = self.h;
        if i == 0 {
            let (a, b, c, d) = (at(0), at(1), at(2), at(3));
            ((-3.0 * a + 4.0 * b - c) / (2.0 * h), (2.0 * a - 5.0 * b + 4.0 * c - d) / (h * h))
        } else if i == g.nr {
            let n = g.nr;
            let (a, b, c, d) = (at(n), at(n - 1), at(n - 2), at(n - 3));
            ((3.0 * a - 4.0 * b + c) / (2.0 * h), (2.0 * a - 5.0 * b + 4.0 * c - d) / (h * h))
        } else {
            ((at(i + 1) - at(i - 1)) / (2.0 * h), (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h))
        }
    }

    /// `Δ_b u` at a node by finite differences (one-sided in `ρ` on the boundary).
    pub fn sublaplacian(&self, u: &GridFunction, i: usize, j: usize, l: usize) -> f64 {
        let g = &self.grid;
        let uu = &u.u;
        let r = self.rho[i];
        let (ur, urr) = self.d_rho(uu, i, j, l);
        let jp = Self::wrap(j as isize + 1, g.na);
        let jm = Self::wrap(j as isize - 1, g.na);
        let lp = Self::wrap(l as isize + 1, g.nt);
        let lm = Self::wrap(l as isize - 1, g.nt);
        let c = uu[g.idx(i, j, l)];
        let uaa = (uu[g.idx(i, jp, l)] - 2.0 * c + uu[g.idx(i, jm, l)]) / (self.da * self.da);
        let utt = (uu[g.idx(i, j, lp)] - 2.0 * c + uu[g.idx(i, j, lm)]) / (self.dt * self.dt);
        let uat = (uu[g.idx(i, jp, lp)] - uu[g.idx(i, jp, lm)] - uu[g.idx(i, jm, lp)] + uu[g.idx(i, jm, lm)])
            / (4.0 * self.da * self.dt);
        0.5 * (urr + ur / r + uaa / (r * r) - 4.0 * uat + 4.0 * r * r * utt)
    }

    /// `ξ(u)` on a boundary node with the outward normal.
    pub fn normal_derivative(&self, u: &GridFunction, comp: Component, j: usize, l: usize) -> f64 {
        let (i, s) = match comp {
            Component::Inner => (0, -1.0),
            Component::Outer => (self.grid.nr, 1.0),
        };
        s * self.d_rho(&u.u, i, j, l).0 / SQRT_2
    }

    pub fn el_residual(&self, u: &GridFunction, lambda: f64) -> Result<ElResidual> {
        self.check(u)?;
        let g = self.grid;
        let k = self.consts;
        let mut interior = Vec::with_capacity((g.nr - 1) * g.na * g.nt);
        for i in 1..g.nr {
            for j in 0..g.na {
                for l in 0..g.nt {
                    let v = u.get(i, j, l);
                    interior.push(-k.b * self.sublaplacian(u, i, j, l) - lambda * libm::pow(v, k.p - 1.0));
                }
            }
        }
        let robin = 2.0 * (k.n * k.n) as f64 / (2.0 * k.n as f64 + 1.0);
        let mut boundary = Vec::with_capacity(2 * g.na * g.nt);
        for (comp, i, mu) in [(Component::Inner, 0, self.mu_inner), (Component::Outer, g.nr, self.mu_outer)] {
            for j in 0..g.na {
                for l in 0..g.nt {
                    boundary.push(self.normal_derivative(u, comp, j, l) - robin * mu * u.get(i, j, l));
                }
            }
        }
        Ok(ElResidual { interior, boundary })
    }

    /// `Σ u Δ_b u ω + Σ ‖∇^H u‖² ω − c_n Σ_∂ u ξ(u) dσ_bdry`, all by finite differences
    /// and trapezoidal quadrature.
    pub fn green_defect(&self, u: &GridFunction) -> Result<f64> {
        self.check(u)?;
        let g = self.grid;
        let mut s = 0.0;
        for i in 0..=g.nr {
            for j in 0..g.na {
                for l in 0..g.nt {
                    let v = u.get(i, j, l);
                    let (ur, _) = self.d_rho(&u.u, i, j, l);
                    let q = self.angular(&u.u, i, j, l);
                    let grad2 = 0.5 * (ur * ur + q * q);
                    s += self.node_weight[i] * (v * self.sublaplacian(u, i, j, l) + grad2);
                }
            }
        }
        for (comp, i, sig) in [(Component::Inner, 0, self.sigma_bdry_inner), (Component::Outer, g.nr, self.sigma_bdry_outer)] {
            for j in 0..g.na {
                for l in 0..g.nt {
                    s -= self.consts.c * u.get(i, j, l) * self.normal_derivative(u, comp, j, l) * sig;
                }
            }
        }
        Ok(s)
    }

    /// Samples a function of `(ρ, α, t)` on the grid.
    pub fn sample(&self, f: impl Fn(f64, f64, f64) -> f64) -> GridFunction {
        let g = self.grid;
        let mut u = vec![0.0; g.len()];
        for i in 0..=g.nr {
            for j in 0..g.na {
                for l in 0..g.nt {
                    u[g.idx(i, j, l)] = f(self.rho[i], self.da * j as f64, self.dt * l as f64);
                }
            }
        }
        GridFunction { grid: g, u }
    }

    /// `ω`-volume of `M`.
    pub fn volume(&self) -> f64 {
        self.node_weight.iter().sum::<f64>() * (self.grid.na * self.grid.nt) as f64
    }
}

/// One optimizer iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub step: f64,
    pub grad_norm: f64,
    pub max_el_residual: f64,
}

/// Output of [`minimize_q`].
#[derive(Clone, Debug)]
pub struct YamabeRun {
    pub u: GridFunction,
    pub q: f64,
    /// `(p/2) Q*`.
    pub lambda: f64,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    /// EL residual with `λ = (p/2)Q*`.
    pub residual: ElResidual,
    /// EL residual with `λ = Q*`, the multiplier of the constrained problem.
    pub residual_constrained: ElResidual,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl YamabeRun {
    pub fn status(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { iterations: self.iterations, grad_norm: self.grad_norm })
        }
    }
}

struct Objective<'a> {
    disc: &'a Discretization,
}

impl Objective<'_> {
    /// `J(w) = A(e^w)/B(e^w)^{2/p}` and `∂J/∂w`.
    fn eval(&self, w: &[f64]) -> (f64, Vec<f64>, Functionals) {
        let u: Vec<f64> = w.iter().map(|v| libm::exp(*v)).collect();
        let mut ga = vec![0.0; u.len()];
        let mut gb = vec![0.0; u.len()];
        let f = self.disc.eval(&u, Some((&mut ga, &mut gb)));
        let sb = libm::sqrt(f.b);
        let j = f.a / sb;
        let g = (0..u.len()).map(|k| u[k] * (ga[k] / sb - 0.5 * f.a / (f.b * sb) * gb[k])).collect();
        (j, g, f)
    }
}

fn weighted_norm(disc: &Discretization, g: &[f64]) -> f64 {
    let grid = disc.grid;
    let mut m = 0.0f64;
    for i in 0..=grid.nr {
        for j in 0..grid.na {
            for l in 0..grid.nt {
                let k = grid.idx(i, j, l);
                m = m.max(g[k].abs() / disc.node_weight[i]);
            }
        }
    }
    m
}

/// Minimizes `Q_θ` with `B_θ(u) = 1` from the initial guess `u ≡ 1`.
///
/// Stops when the `ω`-weighted gradient of the scale-free objective falls
/// below `tol` or after `max_iters` iterations. The returned iterate is the
/// best one seen, normalized to `B_h = 1`.
pub fn minimize_q(domain: &YamabeDomain, grid: YamabeGrid, tol: f64, max_iters: usize) -> Result<YamabeRun> {
    let disc = Discretization::new(*domain, grid)?;
    minimize_q_from(&disc, GridFunction::constant(grid, 1.0), tol, max_iters)
}

pub fn minimize_q_from(disc: &Discretization, init: GridFunction, tol: f64, max_iters: usize) -> Result<YamabeRun> {
    const MEMORY: usize = 8;
    const FLAT: f64 = 1e-13;
    disc.check(&init)?;
    if init.u.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidDomain("initial guess must be positive"));
    }
    let obj = Objective { disc };
    let k = disc.consts;
    let normalize = |w: &mut [f64], f: &Functionals| {
        // B(cu) = c⁴B(u)
        let s = -0.25 * libm::log(f.b);
        w.iter_mut().for_each(|v| *v += s);
    };
    let g = disc.grid;
    let pre: Vec<f64> = (0..g.len()).map(|k| 1.0 / disc.node_weight[k / (g.na * g.nt)]).collect();
    let mut w: Vec<f64> = init.u.iter().map(|v| libm::log(*v)).collect();
    let (_, _, f0) = obj.eval(&w);
    normalize(&mut w, &f0);
    let (mut jv, mut g, mut f) = obj.eval(&w);
    let mut log = Vec::new();
    let mut hist: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut gnorm = weighted_norm(disc, &g);
    let mut iters = 0;
    let mut converged = gnorm <= tol;
    let el = |w: &[f64], q: f64| {
        let u = GridFunction { grid: disc.grid, u: w.iter().map(|v| libm::exp(*v)).collect() };
        disc.el_residual(&u, 0.5 * k.p * q).map(|r| r.max()).unwrap_or(f64::NAN)
    };
    log.push(IterationRecord { iter: 0, q: f.q, a: f.a, b: f.b, step: 0.0, grad_norm: gnorm, max_el_residual: el(&w, f.q) });
    while !converged && iters < max_iters {
        iters += 1;
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y) in hist.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &d);
            axpy(-a, y, &mut d);
            alphas.push((a, rho));
        }
        // initial inverse Hessian γ·diag(1/W)
        let gamma = match hist.last() {
            Some((s, y)) => dot(s, y) / weighted_dot(&pre, y, y),
            None => 1.0 / (1.0 + gnorm),
        };
        d.iter_mut().zip(&pre).for_each(|(v, m)| *v *= gamma * m);
        for ((s, y), (a, rho)) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            axpy(a - b, s, &mut d);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (jt, gt, ft) = obj.eval(&trial);
            // near the minimum J is flat to summation round-off; fall back on the gradient
            let flat = (jt - jv).abs() <= FLAT * jv.abs().max(1.0)
                && weighted_norm(disc, &gt) < gnorm;
            if jt.is_finite() && (jt <= jv + 1e-4 * step * slope || flat) {
                accepted = Some((trial, jt, gt, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((mut wn, jn, gn, fnew)) = accepted else {
            break;
        };
        let s: Vec<f64> = wn.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        // J is scale-free, so renormalizing does not change J or its gradient
        normalize(&mut wn, &fnew);
        let (jr, gr, fr) = obj.eval(&wn);
        if step < 1e-3 {
            hist.clear();
        } else if dot(&s, &y) > 1e-10 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) {
            hist.push((s, y));
            if hist.len() > MEMORY {
                hist.remove(0);
            }
        }
        let _ = jn;
        w = wn;
        jv = jr;
        g = gr;
        f = fr;
        gnorm = weighted_norm(disc, &g);
        converged = gnorm <= tol;
        log.push(IterationRecord { iter: iters, q: f.q, a: f.a, b: f.b, step, grad_norm: gnorm, max_el_residual: el(&w, f.q) });
    }
    let u = GridFunction { grid: disc.grid, u: w.iter().map(|v| libm::exp(*v)).collect() };
    let q = f.q;
    let lambda = 0.5 * k.p * q;
    let residual = disc.el_residual(&u, lambda)?;
    let residual_constrained = disc.el_residual(&u, q)?;
    Ok(YamabeRun { u, q, lambda, log, converged, residual, residual_constrained, iterations: iters, grad_norm: gnorm })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dot(a, b)
}

fn weighted_dot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    m.iter().zip(a).zip(b).map(|((m, a), b)| m * a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    crate::linalg::axpy(alpha, x, y)
}

/// Positive radial solution of `−b·½(u'' + u'/ρ) = λu³` with the two Robin
/// conditions, normalized to `B = 1`, found by shooting with RK4.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    /// `Q = λ` at `B = 1`.
    pub q: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

fn shoot(domain: &YamabeDomain, k: &YamabeConstants, mu0: f64, mu1: f64, lambda: f64, steps: usize) -> (f64, Vec<f64>, Vec<f64>, bool) {
    let robin = k.robin();
    let h = (domain.r1 - domain.r0) / steps as f64;
    // inner outward normal is −∂ρ/√2: −u'/√2 = robin·μ₀·u
    let mut y = [1.0, -SQRT_2 * robin * mu0];
    let rhs = |r: f64, y: [f64; 2]| [y[1], -y[1] / r - 2.0 * lambda / k.b * y[0] * y[0] * y[0]];
    let mut rho = vec![domain.r0];
    let mut u = vec![1.0];
    let mut positive = true;
    for s in 0..steps {
        let r = domain.r0 + h * s as f64;
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        rho.push(r + h);
        u.push(y[0]);
        positive &= y[0] > 0.0;
    }
    // outer: u'/√2 = robin·μ₁·u
    (y[1] - SQRT_2 * robin * mu1 * y[0], rho, u, positive)
}

pub fn radial_oracle(domain: &YamabeDomain, steps: usize) -> Result<RadialSolution> {
    let steps = steps.max(2) + steps % 2;
    let k = YamabeConstants::new(1);
    let mu0 = mu_theta(domain, Component::Inner)?;
    let mu1 = mu_theta(domain, Component::Outer)?;
    let miss = |l: f64| shoot(domain, &k, mu0, mu1, l, steps);
    // 2πL · 4
    let vol = 8.0 * PI * domain.length;
    // scan downward from λ = 0 for the first sign change with u > 0
    let mut hi = 0.0;
    let mut f_hi = miss(hi).0;
    let mut step = 1e-3;
    let mut lo = None;
    for _ in 0..200 {
        let l = hi - step;
        let (fl, _, _, pos) = miss(l);
        if !pos {
            break;
        }
        if fl.signum() != f_hi.signum() {
            lo = Some(l);
            break;
        }
        hi = l;
        f_hi = fl;
        step *= 1.5;
    }
    let mut lo = lo.ok_or(Error::NotConverged { iterations: 200, grad_norm: f_hi.abs() })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = miss(mid).0;
        if fm.signum() == f_hi.signum() {
            hi = mid;
            f_hi = fm;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (_, rho, u, _) = miss(lambda);
    // B = 2πL ∫ u⁴ 4ρ dρ by Simpson on the RK4 nodes (steps even)
    let hstep = (domain.r1 - domain.r0) / steps as f64;
    let mut b = 0.0;
    for i in 0..=steps {
        let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        b += w * libm::pow(u[i], 4.0) * rho[i];
    }
    b *= hstep / 3.0 * vol;
    // B(cu) = c⁴B; λ scales as c⁻²
    let c = libm::pow(b, -0.25);
    Ok(RadialSolution { q: lambda / (c * c), rho, u: u.iter().map(|v| v * c).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_n1() {
        let k = YamabeConstants::new(1);
        assert_eq!((k.p, k.b, k.c), (4.0, 4.0, 2.0));
        assert!((k.a - 16.0 / 3.0).abs() < 1e-15);
        assert!((k.robin() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bad_domains() {
        assert!(YamabeDomain::new(1.0, 0.5, 1.0).is_err());
        assert!(YamabeDomain::new(0.0, 0.5, 1.0).is_err());
        assert!(YamabeDomain::new(0.5, 1.0, -1.0).is_err());
        assert_eq!(YamabeGrid::new(2, 8, 8), Err(Error::EmptyGrid));
    }
}
