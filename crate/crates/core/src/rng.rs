//! Deterministic random streams and the samplers built on them.
//!
//! A [`RandomStream`] is a ChaCha8 keystream selected by `(seed, stream_id)`.
//! The 64-bit seed is expanded into the 256-bit key, the stream id selects one
//! of 2^64 non-overlapping nonces, and draws are read off in counter order.
//! The n-th draw of a stream is therefore a pure function of
//! `(seed, stream_id, n)`, and partitioning work across streams costs nothing.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};

const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 64-bit words consumed so far.
    pub fn position(&self) -> u128 {
        // word_pos counts 32-bit words
        self.rng.get_word_pos() / 2
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIT_53
    }

    /// Bernoulli draw: `true` with probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        check_probability("p", p)?;
        Ok(self.uniform() < p)
    }

    #[inline]
    pub fn weibull(&mut self, dist: &DistributionSpec) -> f64 {
        dist.inverse_cdf_unchecked(self.uniform())
    }
}

pub fn make_stream(seed: u64, stream_id: u64) -> RandomStream {
    RandomStream::new(seed, stream_id)
}

pub fn sample_uniform(stream: &mut RandomStream) -> f64 {
    stream.uniform()
}

pub fn sample_bernoulli(stream: &mut RandomStream, p: f64) -> Result<bool> {
    stream.bernoulli(p)
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: p,
            expected: "[0, 1]",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(seed: u64, id: u64, n: usize) -> Vec<f64> {
        let mut s = make_stream(seed, id);
        (0..n).map(|_| s.uniform()).collect()
    }

    #[test]
    fn same_seed_and_stream_reproduce() {
        assert_eq!(draws(42, 0, 1000), draws(42, 0, 1000));
    }

    #[test]
    fn distinct_streams_differ() {
        let a = draws(42, 0, 10_000);
        let b = draws(42, 1, 10_000);
        assert!(a.iter().zip(&b).any(|(x, y)| x != y));
        // no shared values at all is the expected outcome for 53-bit draws
        let shared = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert_eq!(shared, 0);
    }

    #[test]
    fn seed_sensitivity() {
        assert_ne!(draws(42, 0, 100), draws(43, 0, 100));
    }

    #[test]
    fn uniform_range_and_moments() {
        let mut s = make_stream(7, 3);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut below = 0usize;
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            if u < 0.25 {
                below += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() <= 0.0015, "mean {mean}");
        let frac = below as f64 / n as f64;
        assert!((frac - 0.25).abs() <= 0.0013, "frac {frac}");
    }

    #[test]
    fn bernoulli_extremes_and_frequency() {
        let mut s = make_stream(1, 0);
        for _ in 0..10_000 {
            assert!(!s.bernoulli(0.0).unwrap());
            assert!(s.bernoulli(1.0).unwrap());
        }
        let n = 1_000_000;
        let ones = (0..n).filter(|_| s.bernoulli(0.3).unwrap()).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.3).abs() <= 0.0014, "freq {freq}");
    }

    #[test]
    fn bernoulli_rejects_bad_probability() {
        let mut s = make_stream(1, 0);
        assert!(matches!(s.bernoulli(1.5), Err(Error::Domain { .. })));
        assert!(s.bernoulli(-0.1).is_err());
        assert!(s.bernoulli(f64::NAN).is_err());
    }

    #[test]
    fn position_counts_draws() {
        let mut s = make_stream(9, 9);
        for _ in 0..17 {
            s.uniform();
        }
        assert_eq!(s.position(), 17);
    }
}
