use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weibull lifetime distribution, `S(t) = exp(-(t/scale)^shape)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub shape: f64,
    pub scale: f64,
}

impl Default for DistributionSpec {
    fn default() -> Self {
        Self::EXPONENTIAL
    }
}

impl DistributionSpec {
    pub const EXPONENTIAL: Self = Self {
        shape: 1.0,
        scale: 1.0,
    };

    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        let d = Self { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::Domain {
                name: "shape",
                value: self.shape,
                expected: "(0, inf)",
            });
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Domain {
                name: "scale",
                value: self.scale,
                expected: "(0, inf)",
            });
        }
        Ok(())
    }

    pub fn is_exponential(&self) -> bool {
        self.shape == 1.0
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        (-(t / self.scale).powf(self.shape)).exp()
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let z = t / self.scale;
        if self.shape == 1.0 {
            return (-z).exp() / self.scale;
        }
        if t == 0.0 {
            return if self.shape < 1.0 {
                f64::INFINITY
            } else {
                0.0
            };
        }
        self.shape / self.scale * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// `scale * (-ln(1-u))^(1/shape)` for `u` in `[0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Domain {
                name: "u",
                value: u,
                expected: "[0, 1)",
            });
        }
        Ok(self.inverse_cdf_unchecked(u))
    }

    #[inline]
    pub(crate) fn inverse_cdf_unchecked(&self, u: f64) -> f64 {
        let e = -(-u).ln_1p();
        if self.shape == 1.0 {
            self.scale * e
        } else {
            self.scale * e.powf(1.0 / self.shape)
        }
    }
}

pub fn weibull_inverse_cdf(u: f64, dist: &DistributionSpec) -> Result<f64> {
    dist.inverse_cdf(u)
}

// Lanczos approximation (g = 7, n = 9), ~15 significant digits for x > 0.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_examples() {
        let d = DistributionSpec::new(2.0, 5.0).unwrap();
        assert_eq!(d.inverse_cdf(0.0).unwrap(), 0.0);

        let u = 1.0 - (-1.0f64).exp();
        let x = DistributionSpec::EXPONENTIAL.inverse_cdf(u).unwrap();
        assert!((x - 1.0).abs() < 1e-12);

        let d = DistributionSpec::new(2.0, 1.0).unwrap();
        let x = d.inverse_cdf(0.5).unwrap();
        assert!((x - 2f64.ln().sqrt()).abs() < 1e-12);
        assert!((x - 0.8325546).abs() < 1e-7);
    }

    #[test]
    fn inverse_cdf_domain() {
        let d = DistributionSpec::EXPONENTIAL;
        assert!(d.inverse_cdf(1.0).is_err());
        assert!(d.inverse_cdf(-1e-9).is_err());
        assert!(d.inverse_cdf(f64::NAN).is_err());
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(DistributionSpec::new(0.0, 1.0).is_err());
        assert!(DistributionSpec::new(1.0, -2.0).is_err());
        assert!(DistributionSpec::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn survival_inverts_cdf() {
        let d = DistributionSpec::new(1.7, 2.3).unwrap();
        for i in 0..100 {
            let u = i as f64 / 100.0;
            let t = d.inverse_cdf(u).unwrap();
            assert!((1.0 - d.survival(t) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        let d = DistributionSpec::new(2.0, 1.0).unwrap();
        assert!((d.mean() - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_sample_mean() {
        let mut s = crate::rng::make_stream(11, 0);
        let d = DistributionSpec::EXPONENTIAL;
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.weibull(&d)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.003, "mean {mean}");
    }
}
