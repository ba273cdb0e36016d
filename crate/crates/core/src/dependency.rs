//! Component dependency transforms.
//!
//! Each model maps a covariate lifetime `x0`, independent lifetimes
//! `x[0..n]` and a dependency parameter `p` to dependent lifetimes `y`:
//!
//! * `Linear`: `y_k = (1 - p) x_k + p x0`
//! * `GlobalCcf`: with probability `p` every `y_k = x0`, otherwise `y = x`
//! * `MarginalCcf`: independently per component, `y_k = x0` with probability `p`

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::{check_probability, RandomStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DependencyModel {
    Linear,
    GlobalCcf,
    MarginalCcf,
}

impl DependencyModel {
    pub const ALL: [DependencyModel; 3] = [Self::Linear, Self::GlobalCcf, Self::MarginalCcf];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::GlobalCcf => "global-ccf",
            Self::MarginalCcf => "marginal-ccf",
        }
    }

    /// Uniform draws consumed per sample of `n` components.
    ///
    /// Fixed regardless of the Bernoulli outcomes so that sample `i` of a
    /// chunk always starts at the same stream offset.
    pub fn draws_per_sample(&self, n: usize) -> usize {
        match self {
            Self::Linear => n + 1,
            Self::GlobalCcf => n + 2,
            Self::MarginalCcf => 2 * n + 1,
        }
    }
}

impl fmt::Display for DependencyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DependencyModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "linear" => Ok(Self::Linear),
            "global-ccf" | "global" => Ok(Self::GlobalCcf),
            "marginal-ccf" | "marginal" => Ok(Self::MarginalCcf),
            _ => Err(Error::Config {
                field: "model",
                reason: format!("unknown model {s:?}; expected linear, global-ccf or marginal-ccf"),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencyConfig {
    pub model: DependencyModel,
    pub p: f64,
}

impl DependencyConfig {
    pub fn new(model: DependencyModel, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self { model, p })
    }
}

/// Dependent component lifetimes `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTtfVector(pub Vec<f64>);

impl ComponentTtfVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn linear_combine(x0: f64, x: &[f64], p: f64) -> Result<ComponentTtfVector> {
    check_probability("p", p)?;
    Ok(ComponentTtfVector(
        x.iter().map(|&xk| linear_mix(x0, xk, p)).collect(),
    ))
}

#[inline]
fn linear_mix(x0: f64, xk: f64, p: f64) -> f64 {
    // exact at both endpoints
    if p == 0.0 {
        xk
    } else if p == 1.0 {
        x0
    } else {
        (1.0 - p) * xk + p * x0
    }
}

pub fn global_ccf_select(x0: f64, x: &[f64], xi: bool) -> ComponentTtfVector {
    if xi {
        ComponentTtfVector(vec![x0; x.len()])
    } else {
        ComponentTtfVector(x.to_vec())
    }
}

pub fn marginal_ccf_select(x0: f64, x: &[f64], xi: &[bool]) -> Result<ComponentTtfVector> {
    if x.len() != xi.len() {
        return Err(Error::Dimension {
            what: "xi",
            got: xi.len(),
            expected: x.len(),
        });
    }
    Ok(ComponentTtfVector(
        x.iter()
            .zip(xi)
            .map(|(&xk, &b)| if b { x0 } else { xk })
            .collect(),
    ))
}

/// Draws one dependent lifetime vector into `y` (length `n`).
///
/// Stream consumption per call: `x0`, then `x_1..x_n`, then for `GlobalCcf`
/// one uniform for the shared indicator and for `MarginalCcf` one uniform per
/// component. Indicators are `u < p`.
#[inline]
pub fn draw_into(
    cfg: &DependencyConfig,
    dist: &DistributionSpec,
    stream: &mut RandomStream,
    y: &mut [f64],
) {
    let x0 = stream.weibull(dist);
    for yk in y.iter_mut() {
        *yk = stream.weibull(dist);
    }
    match cfg.model {
        DependencyModel::Linear => {
            for yk in y.iter_mut() {
                *yk = linear_mix(x0, *yk, cfg.p);
            }
        }
        DependencyModel::GlobalCcf => {
            if stream.uniform() < cfg.p {
                y.fill(x0);
            }
        }
        DependencyModel::MarginalCcf => {
            for yk in y.iter_mut() {
                if stream.uniform() < cfg.p {
                    *yk = x0;
                }
            }
        }
    }
}

pub fn draw_ttf_vector(
    cfg: &DependencyConfig,
    dist: &DistributionSpec,
    n: usize,
    stream: &mut RandomStream,
) -> Result<ComponentTtfVector> {
    if n == 0 {
        return Err(Error::Config {
            field: "n",
            reason: "need at least one component".into(),
        });
    }
    check_probability("p", cfg.p)?;
    let mut y = vec![0.0; n];
    draw_into(cfg, dist, stream, &mut y);
    Ok(ComponentTtfVector(y))
}
