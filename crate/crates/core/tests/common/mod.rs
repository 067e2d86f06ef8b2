#![allow(dead_code)]

use cfet_core::scalar::{int, rat};
use cfet_core::{Rational, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Positive integers `1..=grid` normalised to sum one.
pub fn simplex_point(rng: &mut ChaCha8Rng, stages: usize, grid: i64) -> Vec<Rational> {
    let raw: Vec<i64> = (0..stages).map(|_| rng.gen_range(1..=grid)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|k| rat(k, total)).collect()
}

/// Positive rationals `p/q` with `p ∈ 1..=grid`, `q ∈ 1..=grid`.
pub fn positive_point(rng: &mut ChaCha8Rng, stages: usize, grid: i64) -> Vec<Rational> {
    (0..stages).map(|_| rat(rng.gen_range(1..=grid), rng.gen_range(1..=grid))).collect()
}

/// Signed rationals with denominators up to `grid`.
pub fn signed_point(rng: &mut ChaCha8Rng, stages: usize, grid: i64) -> Vec<Rational> {
    (0..stages).map(|_| rat(rng.gen_range(-grid..=grid), rng.gen_range(1..=grid))).collect()
}

pub fn exact(v: &[Rational]) -> Vec<Scalar> {
    v.iter().cloned().map(Scalar::Exact).collect()
}

pub fn zero() -> Rational {
    int(0)
}
