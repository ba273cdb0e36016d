//! Exact and quadrature-based reliability of the three dependency models.
//!
//! These are independent of the Monte Carlo engine and serve as ground truth.

mod quadrature;

pub use quadrature::{integrate, QuadOptions, QuadResult};

use serde::{Deserialize, Serialize};

use crate::dependency::DependencyModel;
use crate::distribution::DistributionSpec;
use crate::engine::ArchitectureSpec;
use crate::error::{Error, Result};
use crate::rng::check_probability;

/// Component survival `S(t) = exp(-(t/scale)^shape)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFunction {
    pub dist: DistributionSpec,
}

impl SurvivalFunction {
    pub fn new(dist: DistributionSpec) -> Self {
        Self { dist }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.dist.survival(t)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn binomial_pmf(n: usize, k: usize, q: f64) -> f64 {
    binomial(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32)
}

/// `P(Binomial(n, q) >= k)`; 1 for `k <= 0`, 0 for `k > n`.
pub fn binomial_tail(n: usize, k: i64, q: f64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    let k = k as usize;
    if k > n {
        return 0.0;
    }
    (k..=n).map(|i| binomial_pmf(n, i, q)).sum::<f64>().min(1.0)
}

/// MooN reliability given a common component survival probability `s`.
fn moon_given_survival(s: f64, arch: &ArchitectureSpec) -> f64 {
    binomial_tail(arch.n_components, arch.m_required as i64, s)
}

pub fn indep_moon_reliability(t: f64, arch: &ArchitectureSpec, s: &SurvivalFunction) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    moon_given_survival(s.eval(t), arch)
}

/// Mean of the independent MooN failure time for exponential components:
/// `scale * sum_{i=M}^{N} 1/i`.
pub fn indep_moon_mean_exponential(arch: &ArchitectureSpec, dist: &DistributionSpec) -> Result<f64> {
    arch.validate()?;
    if !dist.is_exponential() {
        return Err(Error::Unsupported(format!(
            "closed-form order-statistic mean needs shape = 1, got {}",
            dist.shape
        )));
    }
    Ok(dist.scale
        * (arch.m_required..=arch.n_components)
            .map(|i| 1.0 / i as f64)
            .sum::<f64>())
}

/// `(1-p) E[independent MooN] + p E[X0]`; exact for Linear and GlobalCcf.
pub fn linear_mean_prediction(p: f64, arch: &ArchitectureSpec, dist: &DistributionSpec) -> Result<f64> {
    check_probability("p", p)?;
    let independent = indep_moon_mean_exponential(arch, dist)?;
    Ok((1.0 - p) * independent + p * dist.scale)
}

pub fn global_ccf_reliability(t: f64, p: f64, arch: &ArchitectureSpec, s: &SurvivalFunction) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    (1.0 - p) * indep_moon_reliability(t, arch, s) + p * s.eval(t)
}

/// Exact reliability by conditioning on the number `j` of components tied to X0.
pub fn marginal_ccf_reliability(t: f64, p: f64, arch: &ArchitectureSpec, s: &SurvivalFunction) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let n = arch.n_components;
    let m = arch.m_required as i64;
    let st = s.eval(t);
    (0..=n)
        .map(|j| {
            let free = n - j;
            let tied_alive = binomial_tail(free, m - j as i64, st);
            let tied_dead = binomial_tail(free, m, st);
            binomial_pmf(n, j, p) * (st * tied_alive + (1.0 - st) * tied_dead)
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Reliability of the linear model by quadrature over the covariate.
///
/// Given `X0 = x`, each component survives past `t` with probability
/// `S((t - p x)/(1 - p))`, and all survive once `p x >= t`. The integral is
/// split at `x = t/p` where the integrand switches to 1.
pub fn linear_model_reliability(t: f64, p: f64, arch: &ArchitectureSpec, s: &SurvivalFunction) -> Result<f64> {
    check_probability("p", p)?;
    if t <= 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(s.eval(t));
    }
    if p == 0.0 {
        return Ok(indep_moon_reliability(t, arch, s));
    }
    let dist = s.dist;
    // X0 beyond this carries less than 1e-17 of the mass
    let x_max = dist.scale * (17.0 * std::f64::consts::LN_10).powf(1.0 / dist.shape);
    let kink = t / p;
    let upper = kink.min(x_max);
    let tail = if kink < x_max { dist.survival(kink) } else { 0.0 };
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_evaluations: 100_000,
    };
    let body = integrate(
        |x0| {
            let sc = s.eval((t - p * x0) / (1.0 - p));
            Ok(dist.pdf(x0) * moon_given_survival(sc, arch))
        },
        0.0,
        upper,
        &opts,
    )?;
    Ok((body.value + tail).clamp(0.0, 1.0))
}

/// Truncation and accuracy settings for [`oracle_mean`].
#[derive(Clone, Copy, Debug)]
pub struct MeanPolicy {
    /// Integration stops where the reliability first drops below this.
    pub tail_threshold: f64,
    /// First cutoff probed; doubled until the tail condition holds.
    pub initial_cutoff: f64,
    pub abs_tol: f64,
}

impl Default for MeanPolicy {
    fn default() -> Self {
        Self {
            tail_threshold: 1e-10,
            initial_cutoff: 1.0,
            abs_tol: 1e-7,
        }
    }
}

/// `E[T] = integral of R(t) over [0, inf)` for a nonnegative failure time.
pub fn oracle_mean<F>(mut reliability: F, policy: &MeanPolicy) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut cutoff = policy.initial_cutoff;
    let mut doublings = 0;
    while reliability(cutoff)? >= policy.tail_threshold {
        cutoff *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Quadrature {
                a: 0.0,
                b: cutoff,
                estimate: f64::NAN,
                error_estimate: f64::INFINITY,
                evaluations: doublings,
            });
        }
    }
    let opts = QuadOptions {
        abs_tol: policy.abs_tol,
        rel_tol: 0.0,
        max_evaluations: 20_000,
    };
    Ok(integrate(reliability, 0.0, cutoff, &opts)?.value)
}

/// Smallest `t` with `R(t) <= level`, by bisection on a non-increasing `R`.
pub fn oracle_quantile<F>(mut reliability: F, level: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut hi = 1.0;
    while reliability(hi)? > level {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Unsupported("reliability never reaches level".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reliability(mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Reliability of `model` at `t`.
pub fn model_reliability(
    model: DependencyModel,
    t: f64,
    p: f64,
    arch: &ArchitectureSpec,
    dist: &DistributionSpec,
) -> Result<f64> {
    check_probability("p", p)?;
    arch.validate()?;
    let s = SurvivalFunction::new(*dist);
    match model {
        DependencyModel::Linear => linear_model_reliability(t, p, arch, &s),
        DependencyModel::GlobalCcf => Ok(global_ccf_reliability(t, p, arch, &s)),
        DependencyModel::MarginalCcf => Ok(marginal_ccf_reliability(t, p, arch, &s)),
    }
}

/// Mean failure time of `model`.
///
/// Linear and global models use the closed form for exponential components.
/// Otherwise the reliability is integrated; for the linear model that nests
/// two quadratures and must be requested with `allow_quadrature`.
pub fn model_mean(
    model: DependencyModel,
    p: f64,
    arch: &ArchitectureSpec,
    dist: &DistributionSpec,
    allow_quadrature: bool,
) -> Result<f64> {
    check_probability("p", p)?;
    arch.validate()?;
    let closed_form = matches!(model, DependencyModel::Linear | DependencyModel::GlobalCcf);
    if closed_form && dist.is_exponential() {
        return linear_mean_prediction(p, arch, dist);
    }
    if model == DependencyModel::Linear && !allow_quadrature {
        return Err(Error::Unsupported(format!(
            "linear-model mean for shape {} has no closed form; enable quadrature",
            dist.shape
        )));
    }
    let policy = MeanPolicy {
        initial_cutoff: dist.scale,
        ..MeanPolicy::default()
    };
    oracle_mean(|t| model_reliability(model, t, p, arch, dist), &policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    const EXP: SurvivalFunction = SurvivalFunction {
        dist: DistributionSpec::EXPONENTIAL,
    };

    fn arch(m: usize) -> ArchitectureSpec {
        ArchitectureSpec::new(m, 3).unwrap()
    }

    #[test]
    fn independent_reliability_examples() {
        assert_eq!(indep_moon_reliability(0.0, &arch(2), &EXP), 1.0);
        assert!((indep_moon_reliability(1.0, &arch(3), &EXP) - (-3.0f64).exp()).abs() < 1e-15);
        assert!((indep_moon_reliability(1.0, &arch(3), &EXP) - 0.049_787_1).abs() < 1e-7);
        assert!((indep_moon_reliability(LN_2, &arch(2), &EXP) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn harmonic_means() {
        let d = DistributionSpec::EXPONENTIAL;
        assert!((indep_moon_mean_exponential(&arch(3), &d).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((indep_moon_mean_exponential(&arch(2), &d).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!((indep_moon_mean_exponential(&arch(1), &d).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        let w = DistributionSpec::new(2.0, 1.0).unwrap();
        assert!(matches!(
            indep_moon_mean_exponential(&arch(1), &w),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn linear_prediction_examples() {
        let d = DistributionSpec::EXPONENTIAL;
        assert_eq!(
            linear_mean_prediction(0.0, &arch(2), &d).unwrap(),
            indep_moon_mean_exponential(&arch(2), &d).unwrap()
        );
        assert_eq!(linear_mean_prediction(1.0, &arch(2), &d).unwrap(), 1.0);
        assert!((linear_mean_prediction(0.5, &arch(2), &d).unwrap() - 11.0 / 12.0).abs() < 1e-15);
        assert!(linear_mean_prediction(0.5, &arch(2), &DistributionSpec::new(1.5, 1.0).unwrap()).is_err());
    }

    #[test]
    fn global_examples() {
        for t in [0.1, 0.7, 2.5] {
            assert_eq!(global_ccf_reliability(t, 0.0, &arch(2), &EXP), indep_moon_reliability(t, &arch(2), &EXP));
            assert_eq!(global_ccf_reliability(t, 1.0, &arch(2), &EXP), EXP.eval(t));
        }
        let v = global_ccf_reliability(1.0, 0.5, &arch(3), &EXP);
        assert!((v - 0.208_833_2).abs() < 1e-7, "{v}");
    }

    #[test]
    fn marginal_endpoints_and_mean() {
        for t in [0.1, 0.7, 2.5] {
            for m in 1..=3 {
                let a = arch(m);
                assert!((marginal_ccf_reliability(t, 0.0, &a, &EXP) - indep_moon_reliability(t, &a, &EXP)).abs() < 1e-15);
                assert!((marginal_ccf_reliability(t, 1.0, &a, &EXP) - EXP.eval(t)).abs() < 1e-15);
            }
        }
        let mean = oracle_mean(|t| Ok(marginal_ccf_reliability(t, 0.5, &arch(1), &EXP)), &MeanPolicy::default()).unwrap();
        // (1/8 + 3/8) 11/6 + 3/8 * 3/2 + 1/8
        assert!((mean - 1.604_166_666_666_666_7).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn linear_quadrature_examples() {
        for t in [0.05, 0.5, 1.3, 4.0] {
            let q = linear_model_reliability(t, 0.0, &arch(2), &EXP).unwrap();
            assert!((q - indep_moon_reliability(t, &arch(2), &EXP)).abs() <= 1e-6);
        }
        assert_eq!(linear_model_reliability(0.0, 0.4, &arch(2), &EXP).unwrap(), 1.0);
        let mean = oracle_mean(|t| linear_model_reliability(t, 0.5, &arch(2), &EXP), &MeanPolicy::default()).unwrap();
        assert!((mean - 11.0 / 12.0).abs() <= 1e-4, "{mean}");
    }

    #[test]
    fn linear_quadrature_single_component_closed_form() {
        // N = 1: Y = (1-p) X1 + p X0, a hypoexponential with rates 1/(1-p), 1/p
        let a = ArchitectureSpec::new(1, 1).unwrap();
        let p: f64 = 0.3;
        let (r1, r2) = (1.0 / (1.0 - p), 1.0 / p);
        for t in [0.2, 1.0, 3.0] {
            let exact = (r2 * (-r1 * t).exp() - r1 * (-r2 * t).exp()) / (r2 - r1);
            let q = linear_model_reliability(t, p, &a, &EXP).unwrap();
            assert!((q - exact).abs() < 1e-9, "t={t}: {q} vs {exact}");
        }
    }

    #[test]
    fn oracle_mean_examples() {
        let pol = MeanPolicy::default();
        let m = oracle_mean(|t| Ok(indep_moon_reliability(t, &arch(3), &EXP)), &pol).unwrap();
        assert!((m - 1.0 / 3.0).abs() <= 1e-5);
        let m = oracle_mean(|t| Ok(global_ccf_reliability(t, 0.5, &arch(2), &EXP)), &pol).unwrap();
        assert!((m - 11.0 / 12.0).abs() <= 1e-5);
        let m = oracle_mean(|t| Ok(indep_moon_reliability(t, &arch(1), &EXP)), &pol).unwrap();
        assert!((m - 11.0 / 6.0).abs() <= 1e-5);
    }

    #[test]
    fn oracles_are_survival_functions() {
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        for model in DependencyModel::ALL {
            for m in 1..=3 {
                for p in [0.0, 0.3, 0.8, 1.0] {
                    let d = DistributionSpec::EXPONENTIAL;
                    let r: Vec<f64> = grid.iter().map(|&t| model_reliability(model, t, p, &arch(m), &d).unwrap()).collect();
                    assert_eq!(r[0], 1.0);
                    for w in r.windows(2) {
                        assert!(w[1] <= w[0] + 1e-12);
                    }
                    assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
                }
            }
        }
    }

    #[test]
    fn models_agree_at_endpoints() {
        let d = DistributionSpec::new(1.4, 2.0).unwrap();
        for m in 1..=3 {
            for t in [0.2, 1.0, 3.5] {
                let vals = |p| DependencyModel::ALL.map(|model| model_reliability(model, t, p, &arch(m), &d).unwrap());
                let v0 = vals(0.0);
                let v1 = vals(1.0);
                for i in 1..3 {
                    assert!((v0[i] - v0[0]).abs() <= 1e-9);
                    assert!((v1[i] - v1[0]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn global_mean_is_linear_in_p() {
        let d = DistributionSpec::EXPONENTIAL;
        for m in 1..=3 {
            for i in 0..=20 {
                let p = i as f64 / 20.0;
                let q = oracle_mean(|t| Ok(global_ccf_reliability(t, p, &arch(m), &EXP)), &MeanPolicy::default()).unwrap();
                assert!((q - linear_mean_prediction(p, &arch(m), &d).unwrap()).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn marginal_mean_is_not_linear() {
        let d = DistributionSpec::EXPONENTIAL;
        for (m, expected) in [(1, 1.604_166_666_7), (3, 0.479_166_666_7)] {
            let q = oracle_mean(|t| Ok(marginal_ccf_reliability(t, 0.5, &arch(m), &EXP)), &MeanPolicy::default()).unwrap();
            assert!((q - expected).abs() < 1e-6);
            assert!((q - linear_mean_prediction(0.5, &arch(m), &d).unwrap()).abs() > 0.05);
        }
    }

    #[test]
    fn global_two_of_three_median_is_ln2() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let med = oracle_quantile(|t| Ok(global_ccf_reliability(t, p, &arch(2), &EXP)), 0.5).unwrap();
            assert!((med - LN_2).abs() < 1e-9, "p={p}: {med}");
        }
    }

    #[test]
    fn binomial_tail_bounds() {
        assert_eq!(binomial_tail(3, 0, 0.2), 1.0);
        assert_eq!(binomial_tail(3, -2, 0.2), 1.0);
        assert_eq!(binomial_tail(3, 4, 0.9), 0.0);
        assert!((binomial_tail(3, 2, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn model_mean_dispatch() {
        let w = DistributionSpec::new(2.0, 1.0).unwrap();
        assert!(matches!(
            model_mean(DependencyModel::Linear, 0.5, &arch(2), &w, false),
            Err(Error::Unsupported(_))
        ));
        // p = 1 reduces to E[X0] = Gamma(1.5)
        let m = model_mean(DependencyModel::Linear, 1.0, &arch(2), &w, true).unwrap();
        assert!((m - w.mean()).abs() < 1e-5);
        let m = model_mean(DependencyModel::GlobalCcf, 0.0, &arch(3), &w, false).unwrap();
        // min of 3 Weibull(2,1) is Weibull(2, 1/sqrt 3)
        assert!((m - w.mean() / 3f64.sqrt()).abs() < 1e-5);
    }
}
