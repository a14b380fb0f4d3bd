//! Deterministic 64-bit random number generation.
//!
//! All stochastic inputs in this crate (problem data, basis initialization,
//! QR column refills) come from a splitmix-style mixing generator so that
//! identical seeds produce identical streams on every platform. The exact
//! constants are part of the repo's reproducibility contract and are
//! documented in `docs/formats.md`:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform doubles are `((u64 >> 11) + 1) * 2^-53` (range `(0, 1]`, never
//! zero so `ln` is total), and Gaussians come from the Box-Muller transform
//! with the cosine value returned first and the sine value cached.

use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// Splitmix-style 64-bit generator with Box-Muller Gaussian sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            cached_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
        z ^ (z >> 31)
    }

    /// Uniform double in `(0, 1]`.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (2.0f64).powi(-53)
    }

    /// Standard Gaussian via Box-Muller; pairs are generated together and
    /// the sine mate is cached for the next call.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(radius * theta.sin());
        radius * theta.cos()
    }

    /// Matrix of standard Gaussians, filled row-major from the stream.
    pub fn gaussian_matrix<T: Scalar>(&mut self, rows: usize, cols: usize) -> DenseMatrix<T> {
        DenseMatrix::from_fn(rows, cols, |_, _| T::from_f64_const(self.next_gaussian()))
    }

    /// Uniform integer in `0..bound` (modulo reduction; bias is irrelevant
    /// for the reproducibility contract).
    pub fn next_index(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Fisher-Yates shuffled `0..n`, swapping from the top index down.
    pub fn shuffled_indices(&mut self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.next_index(i + 1);
            order.swap(i, j);
        }
        order
    }
}

/// One round of the splitmix output mix, used to derive independent
/// sub-streams (per-parameter seeds, QR refill streams) from a base seed.
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let ma: DenseMatrix<f64> = SplitMix64::new(7).gaussian_matrix(5, 3);
        let mb: DenseMatrix<f64> = SplitMix64::new(7).gaussian_matrix(5, 3);
        assert_eq!(ma.data(), mb.data());
    }

    #[test]
    fn uniform_is_in_half_open_unit_interval() {
        let mut g = SplitMix64::new(1);
        for _ in 0..10_000 {
            let u = g.next_f64();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn gaussian_moments_are_sane() {
        let mut g = SplitMix64::new(3);
        let n = 50_000;
        let samples: Vec<f64> = (0..n).map(|_| g.next_gaussian()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut g = SplitMix64::new(9);
        let order = g.shuffled_indices(100);
        let mut seen = vec![false; 100];
        for &i in &order {
            assert!(!seen[i]);
            seen[i] = true;
        }
    }
}
