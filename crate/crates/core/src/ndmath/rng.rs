//! Seeded sampling.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`. Streams are derived from raw `u64` draws
//! only, so they do not depend on `rand` distribution internals:
//!
//! * uniform `[0, 1)`: `(next_u64() >> 11) · 2⁻⁵³`
//! * standard normal: Box–Muller on `u1 = 1 − uniform` (in `(0, 1]`) and
//!   `u2 = uniform`; the cosine branch is returned first and the sine branch
//!   is cached for the next call
//! * index below `n`: high 64 bits of `next_u64() · n`

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::ndmath::Matrix;

const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic random stream. Cloning snapshots the stream position.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher–Yates shuffle, swapping from the last position down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Matrix of i.i.d. standard normal entries, filled row-major.
    pub fn gaussian_fill(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        check_size(rows, cols)?;
        let data = (0..rows * cols).map(|_| self.normal()).collect();
        Matrix::new(rows, cols, data)
    }

    /// Matrix of i.i.d. entries uniform on `[lo, hi)`, filled row-major.
    pub fn uniform_fill(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Result<Matrix> {
        check_size(rows, cols)?;
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "uniform range requires finite lo < hi, got [{lo}, {hi})"
            )));
        }
        let width = hi - lo;
        let data = (0..rows * cols)
            .map(|_| {
                let v = lo + width * self.uniform();
                // rounding can land exactly on hi
                if v < hi {
                    v
                } else {
                    lo
                }
            })
            .collect();
        Matrix::new(rows, cols, data)
    }
}

fn check_size(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "sample shape must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngState::new(42);
        let m = rng.gaussian_fill(1000, 100).unwrap();
        let (mean, var) = mean_var(m.as_slice());
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((0.97..=1.03).contains(&var), "var {var}");
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = RngState::new(42).gaussian_fill(20, 20).unwrap();
        let b = RngState::new(42).gaussian_fill(20, 20).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = RngState::new(43).gaussian_fill(20, 20).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_gaussian() {
        let m = RngState::new(1).gaussian_fill(1, 1).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!(m.get(0, 0).is_finite());
        assert!(RngState::new(1).gaussian_fill(0, 3).is_err());
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut rng = RngState::new(5);
        let m = rng.uniform_fill(1, 100_000, -0.33, 0.33).unwrap();
        assert!(m.as_slice().iter().all(|&v| (-0.33..0.33).contains(&v)));
        let (mean, _) = mean_var(m.as_slice());
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_is_deterministic() {
        let a = RngState::new(9).uniform_fill(3, 7, 0.0, 2.0).unwrap();
        let b = RngState::new(9).uniform_fill(3, 7, 0.0, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_rejects_empty_range() {
        let mut rng = RngState::new(0);
        assert!(rng.uniform_fill(1, 1, 1.0, 1.0).is_err());
        assert!(rng.uniform_fill(1, 1, 2.0, 1.0).is_err());
    }

    #[test]
    fn snapshot_replays_stream() {
        let mut rng = RngState::new(77);
        rng.normal();
        let mut snap = rng.clone();
        let a: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..5).map(|_| snap.normal()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = RngState::new(8);
        let mut v: Vec<usize> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
