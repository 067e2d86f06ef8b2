//! Seeded exact samplers.

use cfet_core::scalar::{int, rat};
use cfet_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Lattice points `k/Σk` with `k_j ∈ 1..=grid`: exact, positive, summing to one.
pub fn simplex_point<R: Rng>(rng: &mut R, stages: usize, grid: i64) -> Vec<Rational> {
    let raw: Vec<i64> = (0..stages).map(|_| rng.gen_range(1..=grid)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|k| rat(k, total)).collect()
}

/// Positive rationals `p/q` with `p, q ∈ 1..=grid`, not normalised.
pub fn positive_point<R: Rng>(rng: &mut R, stages: usize, grid: i64) -> Vec<Rational> {
    (0..stages).map(|_| rat(rng.gen_range(1..=grid), rng.gen_range(1..=grid))).collect()
}

/// Signed rationals with numerators in `-grid..=grid`.
pub fn signed_point<R: Rng>(rng: &mut R, count: usize, grid: i64) -> Vec<Rational> {
    (0..count).map(|_| rat(rng.gen_range(-grid..=grid), rng.gen_range(1..=grid))).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn zero() -> Rational {
    int(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed};

    #[test]
    fn simplex_points_are_positive_and_normalised() {
        let mut r = rng(1);
        for n in 1..8 {
            let b = simplex_point(&mut r, n, 1000);
            assert!(b.iter().all(|x| x.is_positive()));
            assert!(b.iter().sum::<Rational>().is_one());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(simplex_point(&mut rng(5), 4, 100), simplex_point(&mut rng(5), 4, 100));
    }
}
