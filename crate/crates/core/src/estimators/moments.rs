use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::CHUNK_SIZE;

/// Count, mean and central power sums up to order four.
///
/// Chunks are reduced independently and merged strictly in chunk order, so
/// the result does not depend on how chunks are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    /// Two-pass moments of a single slice.
    pub fn from_slice(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Self {
            count: values.len() as u64,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn from_chunks(values: &[f64]) -> Self {
        let parts: Vec<Moments> = values.par_chunks(CHUNK_SIZE).map(Self::from_slice).collect();
        parts.iter().fold(Self::default(), |acc, m| acc.merge(m))
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d_n = delta / n;
        let d2 = delta * delta;
        let mean = self.mean + d_n * nb;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * d_n * (na * other.m2 - nb * self.m2);
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d_n * (na * other.m3 - nb * self.m3);
        Self {
            count: self.count + other.count,
            mean,
            m2,
            m3,
            m4,
        }
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64).max(0.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `m3 / m2^1.5` with population central moments; `None` for zero spread.
    pub fn skewness(&self) -> Option<f64> {
        let n = self.count as f64;
        let var = self.m2 / n;
        (var > 0.0).then(|| (self.m3 / n) / var.powf(1.5))
    }

    pub fn kurtosis_excess(&self) -> Option<f64> {
        let n = self.count as f64;
        let var = self.m2 / n;
        (var > 0.0).then(|| (self.m4 / n) / (var * var) - 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(values: &[f64]) -> (f64, f64, f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let c = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
        let (c2, c3, c4) = (c(2), c(3), c(4));
        (mean, c2, c3 / c2.powf(1.5), c4 / (c2 * c2) - 3.0)
    }

    #[test]
    fn merge_agrees_with_single_pass() {
        let mut s = crate::rng::RandomStream::new(3, 0);
        let v: Vec<f64> = (0..200_000).map(|_| -s.uniform().ln()).collect();
        let single = Moments::from_slice(&v);
        let merged = Moments::from_chunks(&v);
        assert_eq!(merged.count, single.count);
        assert!((merged.mean - single.mean).abs() < 1e-13);
        assert!((merged.m2 / single.m2 - 1.0).abs() < 1e-12);
        assert!((merged.m3 / single.m3 - 1.0).abs() < 1e-11);
        assert!((merged.m4 / single.m4 - 1.0).abs() < 1e-11);
        let (mean, var, skew, kurt) = naive(&v);
        assert!((merged.mean - mean).abs() < 1e-13);
        assert!((merged.m2 / merged.count as f64 / var - 1.0).abs() < 1e-12);
        assert!((merged.skewness().unwrap() - skew).abs() < 1e-10);
        assert!((merged.kurtosis_excess().unwrap() - kurt).abs() < 1e-10);
    }

    #[test]
    fn uneven_merge() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.25).collect();
        let whole = Moments::from_slice(&v);
        let (a, b) = v.split_at(137);
        let m = Moments::from_slice(a).merge(&Moments::from_slice(b));
        assert!((m.mean - whole.mean).abs() < 1e-12);
        assert!((m.m2 / whole.m2 - 1.0).abs() < 1e-12);
        assert!((m.m3 - whole.m3).abs() < 1e-9 * whole.m2.powf(1.5));
        assert!((m.m4 / whole.m4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_has_no_shape() {
        let m = Moments::from_slice(&[4.0; 10]);
        assert_eq!(m.std_dev(), 0.0);
        assert_eq!(m.skewness(), None);
        assert_eq!(m.kurtosis_excess(), None);
    }
}
