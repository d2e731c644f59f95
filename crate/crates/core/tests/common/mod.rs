#![allow(dead_code)]

use crgeo_core::{Complex64, HPoint};
use proptest::prelude::*;

pub fn hpoint(n: usize, r: f64) -> impl Strategy<Value = HPoint> {
    prop::collection::vec(-r..r, 2 * n + 1).prop_map(|c| HPoint::from_coords(&c))
}

pub fn zvec(n: usize, r: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-r..r, -r..r), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

pub fn vec_of(d: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, d)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}
