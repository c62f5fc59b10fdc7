//! Fixed-order pairwise summation.
//!
//! Every lattice reduction in the crate goes through [`pairwise`], so results do
//! not depend on thread count or iteration chunking.

use crate::scalar::Real;

const BLOCK: usize = 16;

pub fn pairwise<T: Real>(xs: &[T]) -> T {
    if xs.len() <= BLOCK {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise(&xs), 500500.0);
        assert_eq!(pairwise::<f64>(&[]), 0.0);
    }

    #[test]
    fn beats_naive_on_ill_conditioned_sum() {
        let xs = vec![0.1f32; 1 << 20];
        let naive: f32 = xs.iter().copied().fold(0.0, |a, b| a + b);
        let exact = 0.1f64 * (1 << 20) as f64;
        let pw = pairwise(&xs) as f64;
        assert!((pw - exact).abs() < (naive as f64 - exact).abs());
    }
}
