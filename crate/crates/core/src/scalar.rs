//! Forward-mode scalars.
//!
//! [`HyperDual`] carries `a + b e1 + c e2 + d e1 e2` with `e1² = e2² = 0`.
//! Seeding `e1` along direction `u` and `e2` along `v` yields the value,
//! both directional derivatives and the exact mixed second derivative
//! `u^T H v` in one evaluation.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Real scalar arithmetic shared by `f64` and [`HyperDual`].
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn powf(self, e: f64) -> Self {
        libm::pow(self, e)
    }
    fn atan2(self, x: Self) -> Self {
        libm::atan2(self, x)
    }
}

/// Second-order hyper-dual number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HyperDual {
    pub a: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl HyperDual {
    pub const fn new(a: f64, e1: f64, e2: f64, e12: f64) -> Self {
        Self { a, e1, e2, e12 }
    }

    pub const fn constant(a: f64) -> Self {
        Self::new(a, 0.0, 0.0, 0.0)
    }

    /// Lift a scalar function with known `f(a), f'(a), f''(a)`.
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            a: f0,
            e1: f1 * self.e1,
            e2: f1 * self.e2,
            e12: f1 * self.e12 + f2 * self.e1 * self.e2,
        }
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.a;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.e1 + o.e1, self.e2 + o.e2, self.e12 + o.e12)
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.e1 - o.e1, self.e2 - o.e2, self.e12 - o.e12)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a,
            self.a * o.e1 + self.e1 * o.a,
            self.a * o.e2 + self.e2 * o.a,
            self.a * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.a,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.e1, -self.e2, -self.e12)
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Self { a: self.a + o, ..self }
    }
}

impl Sub<f64> for HyperDual {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Self { a: self.a - o, ..self }
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Self::new(self.a * o, self.e1 * o, self.e2 * o, self.e12 * o)
    }
}

impl Div<f64> for HyperDual {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl AddAssign for HyperDual {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for HyperDual {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for HyperDual {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Scalar for HyperDual {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn re(&self) -> f64 {
        self.a
    }
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.a);
        self.chain(s, 0.5 / s, -0.25 / (s * self.a))
    }
    fn exp(self) -> Self {
        let e = libm::exp(self.a);
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        self.chain(libm::log(self.a), 1.0 / self.a, -1.0 / (self.a * self.a))
    }
    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.a), libm::cos(self.a));
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.a), libm::cos(self.a));
        self.chain(c, -s, -c)
    }
    fn powf(self, e: f64) -> Self {
        let p = libm::pow(self.a, e);
        self.chain(p, e * p / self.a, e * (e - 1.0) * p / (self.a * self.a))
    }
    fn atan2(self, x: Self) -> Self {
        // d atan2(y,x) = (x dy - y dx)/(x^2+y^2); second order via the quotient.
        let r2 = self * self + x * x;
        let num_e1 = x.a * self.e1 - self.a * x.e1;
        let num_e2 = x.a * self.e2 - self.a * x.e2;
        let num_e12 = x.e2 * self.e1 + x.a * self.e12 - self.e2 * x.e1 - self.a * x.e12;
        let d = r2.a;
        HyperDual::new(
            libm::atan2(self.a, x.a),
            num_e1 / d,
            num_e2 / d,
            num_e12 / d - num_e1 * r2.e2 / (d * d),
        )
    }
}

/// Complex number over a generic real scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Cx<S> {
    pub fn new(re: S, im: S) -> Self {
        Self { re, im }
    }
    pub fn real(re: S) -> Self {
        Self { re, im: S::zero() }
    }
    pub fn cst(re: f64, im: f64) -> Self {
        Self { re: S::cst(re), im: S::cst(im) }
    }
    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }
    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }
    pub fn scale(self, s: S) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }
    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.re(), self.im.re())
    }
}

impl<S: Scalar> Add for Cx<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl<S: Scalar> Sub for Cx<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl<S: Scalar> Mul for Cx<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl<S: Scalar> Neg for Cx<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}
