//! System time to failure and batch Monte Carlo simulation.
//!
//! Samples are generated in fixed chunks of [`CHUNK_SIZE`]; chunk `c` draws
//! from stream `(seed, c)`, so sample `i` depends only on `(seed, i)` and the
//! output is identical for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependency::{draw_into, DependencyConfig, DependencyModel};
use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::{
    self, DensityEstimate, Moments, ReliabilityCurve, StatsOptions, SummaryStats,
};
use crate::rng::{check_probability, RandomStream};

pub const CHUNK_SIZE: usize = 1 << 16;

/// Largest sample kept in memory by default (8 bytes per value).
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 100_000_000;

/// Size of the systematic subsample kept when streaming.
pub const STREAM_SUBSAMPLE: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub n_components: usize,
    pub m_required: usize,
}

impl ArchitectureSpec {
    pub fn new(m_required: usize, n_components: usize) -> Result<Self> {
        let a = Self {
            n_components,
            m_required,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 || self.m_required == 0 || self.m_required > self.n_components {
            return Err(Error::Architecture {
                m: self.m_required,
                n: self.n_components,
            });
        }
        Ok(())
    }

    /// Zero-based rank of the failure that brings the system down.
    pub fn failure_rank(&self) -> usize {
        self.n_components - self.m_required
    }

    pub fn label(&self) -> String {
        format!("{}oo{}", self.m_required, self.n_components)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub arch: ArchitectureSpec,
    pub dep: DependencyConfig,
    pub dist: DistributionSpec,
    pub samples: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        check_probability("p", self.dep.p)?;
        self.dist.validate()?;
        if self.samples == 0 {
            return Err(Error::Config {
                field: "samples",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Realizations of the system time to failure for one scenario.
#[derive(Clone, Debug)]
pub struct TtfSample {
    pub values: Vec<f64>,
    pub scenario: ScenarioConfig,
}

impl TtfSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `(N-M+1)`-th smallest element of `y`, i.e. the instant the system fails.
pub fn system_ttf(y: &[f64], arch: &ArchitectureSpec) -> Result<f64> {
    arch.validate()?;
    if y.len() != arch.n_components {
        return Err(Error::Dimension {
            what: "y",
            got: y.len(),
            expected: arch.n_components,
        });
    }
    let mut scratch = y.to_vec();
    Ok(order_statistic(&mut scratch, arch.failure_rank()))
}

/// k-th smallest (zero-based) of `y`; reorders `y`.
#[inline]
pub(crate) fn order_statistic(y: &mut [f64], k: usize) -> f64 {
    match (y.len(), k) {
        (1, _) => y[0],
        (_, 0) => y.iter().copied().fold(f64::INFINITY, f64::min),
        (n, k) if k == n - 1 => y.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        (3, _) => {
            let (a, b, c) = (y[0], y[1], y[2]);
            a.min(b).max(a.max(b).min(c))
        }
        _ => *y.select_nth_unstable_by(k, f64::total_cmp).1,
    }
}

fn fill_chunk(cfg: &ScenarioConfig, chunk: usize, out: &mut [f64]) {
    let mut stream = RandomStream::new(cfg.seed, chunk as u64);
    let n = cfg.arch.n_components;
    let k = cfg.arch.failure_rank();
    let mut y = vec![0.0; n];
    for v in out.iter_mut() {
        draw_into(&cfg.dep, &cfg.dist, &mut stream, &mut y);
        *v = order_statistic(&mut y, k);
    }
}

/// Simulates `cfg.samples` system failure times with the default memory cap.
pub fn simulate_batch(cfg: &ScenarioConfig) -> Result<TtfSample> {
    simulate_batch_with_limit(cfg, DEFAULT_MATERIALIZE_LIMIT)
}

pub fn simulate_batch_with_limit(cfg: &ScenarioConfig, limit: usize) -> Result<TtfSample> {
    cfg.validate()?;
    if cfg.samples > limit {
        return Err(Error::TooLarge {
            requested: cfg.samples,
            limit,
        });
    }
    let mut values = Vec::new();
    values
        .try_reserve_exact(cfg.samples)
        .map_err(|_| Error::TooLarge {
            requested: cfg.samples,
            limit: values.capacity(),
        })?;
    values.resize(cfg.samples, 0.0);
    values
        .par_chunks_mut(CHUNK_SIZE)
        .enumerate()
        .for_each(|(c, out)| fill_chunk(cfg, c, out));
    Ok(TtfSample {
        values,
        scenario: *cfg,
    })
}

/// Moments of the full run plus a systematic subsample for quantiles and KDE.
#[derive(Clone, Debug)]
pub struct StreamedSample {
    pub moments: Moments,
    /// Every `stride`-th sample, in index order.
    pub subsample: Vec<f64>,
    pub stride: usize,
    pub scenario: ScenarioConfig,
}

/// Simulates without materializing the whole sample.
pub fn simulate_streaming(cfg: &ScenarioConfig, subsample_cap: usize) -> Result<StreamedSample> {
    cfg.validate()?;
    let stride = cfg.samples.div_ceil(subsample_cap.max(1)).max(1);
    let chunks = cfg.samples.div_ceil(CHUNK_SIZE);
    let parts: Vec<(Moments, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let len = CHUNK_SIZE.min(cfg.samples - start);
            let mut buf = vec![0.0; len];
            fill_chunk(cfg, c, &mut buf);
            let first = (stride - start % stride) % stride;
            let kept = buf.iter().skip(first).step_by(stride).copied().collect();
            (Moments::from_slice(&buf), kept)
        })
        .collect();
    let mut moments = Moments::default();
    let mut subsample = Vec::new();
    for (m, kept) in parts {
        moments = moments.merge(&m);
        subsample.extend(kept);
    }
    Ok(StreamedSample {
        moments,
        subsample,
        stride,
        scenario: *cfg,
    })
}

/// Fixed part of a sweep: everything but `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub arch: ArchitectureSpec,
    pub model: DependencyModel,
    pub dist: DistributionSpec,
    pub samples: usize,
    pub seed: u64,
}

impl SweepBase {
    pub fn at(&self, p: f64) -> ScenarioConfig {
        ScenarioConfig {
            arch: self.arch,
            dep: DependencyConfig {
                model: self.model,
                p,
            },
            dist: self.dist,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: SweepBase,
    pub p_grid: Vec<f64>,
}

pub const DEFAULT_GRID_POINTS: usize = 20;

/// `count` equally spaced values from 0 to 1 inclusive.
pub fn uniform_p_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    1.0
                } else {
                    i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

impl SweepConfig {
    pub fn new(base: SweepBase, p_grid: Vec<f64>) -> Result<Self> {
        let c = Self { base, p_grid };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.at(0.0).validate()?;
        if self.p_grid.is_empty() {
            return Err(Error::Config {
                field: "p_grid",
                reason: "must not be empty".into(),
            });
        }
        for &p in &self.p_grid {
            check_probability("p_grid", p)?;
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config {
                field: "p_grid",
                reason: "must be strictly increasing".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub p: f64,
    pub stats: SummaryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reliability: Option<ReliabilityCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub entries: Vec<SweepEntry>,
    /// Statistics at `p = 0`; equal to the first entry when the grid starts at 0.
    pub baseline: SummaryStats,
    pub relative: estimators::RelativeCurves,
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub stats: StatsOptions,
    /// Keep per-p density and reliability curves.
    pub keep_curves: bool,
    pub materialize_limit: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            stats: StatsOptions::default(),
            keep_curves: false,
            materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
        }
    }
}

/// Everything extracted from one simulated cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub stats: SummaryStats,
    pub density: DensityEstimate,
    pub reliability: ReliabilityCurve,
}

/// Simulates one cell and extracts statistics, density and survival curves.
///
/// Switches to the streaming path above `materialize_limit`.
pub fn run_cell(cfg: &ScenarioConfig, opts: &StatsOptions, materialize_limit: usize) -> Result<CellResult> {
    let (stats, density, reliability) = if cfg.samples <= materialize_limit {
        let sample = simulate_batch_with_limit(cfg, materialize_limit)?;
        estimators::analyze(&sample.values, opts)?
    } else {
        let streamed = simulate_streaming(cfg, STREAM_SUBSAMPLE)?;
        estimators::analyze_stream(&streamed.moments, &streamed.subsample, opts)?
    };
    Ok(CellResult {
        stats,
        density,
        reliability,
    })
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    sweep_with(cfg, &SweepOptions::default())
}

pub fn sweep_with(cfg: &SweepConfig, opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let mut entries = Vec::with_capacity(cfg.p_grid.len());
    for &p in &cfg.p_grid {
        let cell = run_cell(&cfg.base.at(p), &opts.stats, opts.materialize_limit)?;
        entries.push(SweepEntry {
            p,
            stats: cell.stats,
            density: opts.keep_curves.then_some(cell.density),
            reliability: opts.keep_curves.then_some(cell.reliability),
        });
    }
    let baseline = if cfg.p_grid[0] == 0.0 {
        entries[0].stats.clone()
    } else {
        run_cell(&cfg.base.at(0.0), &opts.stats, opts.materialize_limit)?.stats
    };
    let relative = estimators::relative_curves(&entries, &baseline);
    Ok(SweepResult {
        config: cfg.clone(),
        entries,
        baseline,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(m: usize, n: usize) -> ArchitectureSpec {
        ArchitectureSpec::new(m, n).unwrap()
    }

    fn scenario(model: DependencyModel, p: f64, m: usize, samples: usize) -> ScenarioConfig {
        ScenarioConfig {
            arch: arch(m, 3),
            dep: DependencyConfig::new(model, p).unwrap(),
            dist: DistributionSpec::EXPONENTIAL,
            samples,
            seed: 2024,
        }
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn system_ttf_examples() {
        let y = [3.0, 1.0, 2.0];
        assert_eq!(system_ttf(&y, &arch(1, 3)).unwrap(), 3.0);
        assert_eq!(system_ttf(&y, &arch(3, 3)).unwrap(), 1.0);
        assert_eq!(system_ttf(&y, &arch(2, 3)).unwrap(), 2.0);
    }

    #[test]
    fn system_ttf_errors() {
        assert!(matches!(
            system_ttf(&[1.0, 2.0], &ArchitectureSpec { n_components: 3, m_required: 2 }),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            system_ttf(&[1.0, 2.0, 3.0], &ArchitectureSpec { n_components: 3, m_required: 4 }),
            Err(Error::Architecture { .. })
        ));
        assert!(ArchitectureSpec::new(0, 3).is_err());
    }

    #[test]
    fn order_statistic_matches_sort() {
        let mut s = RandomStream::new(1, 1);
        for n in 1..=7 {
            for k in 0..n {
                for _ in 0..200 {
                    let mut y: Vec<f64> = (0..n).map(|_| s.uniform()).collect();
                    let mut sorted = y.clone();
                    sorted.sort_by(f64::total_cmp);
                    assert_eq!(order_statistic(&mut y, k), sorted[k]);
                }
            }
        }
    }

    #[test]
    fn independent_series_mean() {
        let s = simulate_batch(&scenario(DependencyModel::Linear, 0.0, 3, 1_000_000)).unwrap();
        let m = mean(&s.values);
        assert!((m - 1.0 / 3.0).abs() <= 0.001, "mean {m}");
    }

    #[test]
    fn fully_coupled_mean() {
        for model in DependencyModel::ALL {
            let s = simulate_batch(&scenario(model, 1.0, 2, 1_000_000)).unwrap();
            let m = mean(&s.values);
            assert!((m - 1.0).abs() <= 0.003, "{model}: mean {m}");
        }
    }

    #[test]
    fn marginal_parallel_mean() {
        let s = simulate_batch(&scenario(DependencyModel::MarginalCcf, 0.5, 1, 1_000_000)).unwrap();
        let m = mean(&s.values);
        assert!((m - 1.604167).abs() <= 0.006, "mean {m}");
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = scenario(DependencyModel::MarginalCcf, 0.3, 2, 300_000);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_batch(&cfg).unwrap().values)
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
    }

    #[test]
    fn sample_depends_only_on_seed_and_index() {
        let short = simulate_batch(&scenario(DependencyModel::GlobalCcf, 0.4, 2, 70_000)).unwrap();
        let long = simulate_batch(&scenario(DependencyModel::GlobalCcf, 0.4, 2, 200_000)).unwrap();
        assert_eq!(short.values[..], long.values[..70_000]);
    }

    #[test]
    fn materialization_limit() {
        let cfg = scenario(DependencyModel::Linear, 0.0, 2, 1000);
        let err = simulate_batch_with_limit(&cfg, 999).unwrap_err();
        assert_eq!(
            err,
            Error::TooLarge {
                requested: 1000,
                limit: 999
            }
        );
    }

    #[test]
    fn streaming_matches_materialized_moments() {
        let cfg = scenario(DependencyModel::Linear, 0.4, 2, 250_000);
        let full = simulate_batch(&cfg).unwrap();
        let streamed = simulate_streaming(&cfg, 10_000).unwrap();
        let direct = Moments::from_chunks(&full.values);
        assert_eq!(streamed.moments, direct);
        assert_eq!(streamed.stride, 25);
        let expected: Vec<f64> = full.values.iter().step_by(25).copied().collect();
        assert_eq!(streamed.subsample, expected);
    }

    #[test]
    fn default_grid() {
        let g = uniform_p_grid(20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[19], 1.0);
        for w in g.windows(2) {
            assert!((w[1] - w[0] - 1.0 / 19.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sweep_config_validation() {
        let base = SweepBase {
            arch: arch(2, 3),
            model: DependencyModel::Linear,
            dist: DistributionSpec::EXPONENTIAL,
            samples: 10,
            seed: 0,
        };
        assert!(SweepConfig::new(base, vec![]).is_err());
        assert!(SweepConfig::new(base, vec![0.5, 0.2]).is_err());
        assert!(SweepConfig::new(base, vec![0.2, 1.2]).is_err());
        assert!(SweepConfig::new(base, vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn sweep_adds_baseline_when_missing() {
        let base = SweepBase {
            arch: arch(3, 3),
            model: DependencyModel::Linear,
            dist: DistributionSpec::EXPONENTIAL,
            samples: 50_000,
            seed: 5,
        };
        let with_zero = sweep(&SweepConfig::new(base, vec![0.0, 0.5]).unwrap()).unwrap();
        let without = sweep(&SweepConfig::new(base, vec![0.5]).unwrap()).unwrap();
        assert_eq!(without.entries.len(), 1);
        assert_eq!(with_zero.baseline.mean, without.baseline.mean);
        assert_eq!(with_zero.relative.mean[1], without.relative.mean[0]);
        assert_eq!(with_zero.relative.mean[0], Some(1.0));
    }

    #[test]
    fn linear_sweep_trends() {
        for (m, increasing) in [(3, true), (1, false)] {
            let base = SweepBase {
                arch: arch(m, 3),
                model: DependencyModel::Linear,
                dist: DistributionSpec::EXPONENTIAL,
                samples: 200_000,
                seed: 9,
            };
            let r = sweep(&SweepConfig::new(base, uniform_p_grid(20)).unwrap()).unwrap();
            for w in r.entries.windows(2) {
                let tol = 3.0 * w[0].stats.mean_std_error.hypot(w[1].stats.mean_std_error);
                let d = w[1].stats.mean - w[0].stats.mean;
                if increasing {
                    assert!(d >= -tol, "{m}oo3 p={} d={d}", w[1].p);
                } else {
                    assert!(d <= tol, "{m}oo3 p={} d={d}", w[1].p);
                }
            }
        }
    }
}
