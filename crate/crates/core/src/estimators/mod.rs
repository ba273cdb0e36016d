//! Statistics of a simulated sample of system failure times.

mod kde;
mod moments;

use rayon::slice::ParallelSliceMut;
use serde::{Deserialize, Serialize};

use crate::engine::{SweepEntry, SweepResult, TtfSample};
use crate::error::{Error, Result};

pub use kde::{kde_on_grid, silverman_bandwidth, DensityEstimate, DEFAULT_GRID_POINTS};
pub use moments::Moments;

/// Survival below this is too noisy for a hazard estimate.
pub const HAZARD_MIN_SURVIVAL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub std_dev: f64,
    /// `None` when the sample has zero variance.
    pub skewness: Option<f64>,
    pub kurtosis_excess: Option<f64>,
    pub mean_std_error: f64,
    pub sample_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatsOptions {
    pub kde_grid: usize,
    pub bandwidth: Option<f64>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            kde_grid: DEFAULT_GRID_POINTS,
            bandwidth: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCurve {
    pub t_grid: Vec<f64>,
    pub survival: Vec<f64>,
}

/// Hazard estimate; `None` where survival is below [`HAZARD_MIN_SURVIVAL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardCurve {
    pub t_grid: Vec<f64>,
    pub rate: Vec<Option<f64>>,
}

/// Each statistic divided by its value at `p = 0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelativeCurves {
    pub p: Vec<f64>,
    pub mean: Vec<Option<f64>>,
    pub median: Vec<Option<f64>>,
    pub mode: Vec<Option<f64>>,
    pub std_dev: Vec<Option<f64>>,
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.par_sort_unstable_by(f64::total_cmp);
    v
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn bandwidth_for(sorted: &[f64], std_dev: f64, opts: &StatsOptions) -> Result<f64> {
    match opts.bandwidth {
        Some(h) => Ok(h),
        None => {
            if sorted.len() < 2 {
                return Err(Error::TooFewSamples {
                    needed: 2,
                    got: sorted.len(),
                });
            }
            let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
            silverman_bandwidth(std_dev, iqr, sorted.len())
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::TooFewSamples { needed: 2, got: n })
    } else {
        Ok(())
    }
}

fn stats_from(moments: &Moments, median: f64, mode: f64) -> SummaryStats {
    let std_dev = moments.std_dev();
    SummaryStats {
        mean: moments.mean,
        median,
        mode,
        std_dev,
        skewness: moments.skewness(),
        kurtosis_excess: moments.kurtosis_excess(),
        mean_std_error: std_dev / (moments.count as f64).sqrt(),
        sample_count: moments.count,
    }
}

/// Summary statistics, density and survival on the density grid, sharing one sort.
pub fn analyze(
    values: &[f64],
    opts: &StatsOptions,
) -> Result<(SummaryStats, DensityEstimate, ReliabilityCurve)> {
    check_count(values.len())?;
    let moments = Moments::from_chunks(values);
    let sorted = sorted_copy(values);
    let h = bandwidth_for(&sorted, moments.std_dev(), opts)?;
    let density = kde_on_grid(values, h, opts.kde_grid)?;
    let stats = stats_from(&moments, median_sorted(&sorted), density.argmax());
    let reliability = reliability_sorted(&sorted, &density.grid);
    Ok((stats, density, reliability))
}

/// As [`analyze`], with exact moments and a subsample for quantiles and density.
pub fn analyze_stream(
    moments: &Moments,
    subsample: &[f64],
    opts: &StatsOptions,
) -> Result<(SummaryStats, DensityEstimate, ReliabilityCurve)> {
    check_count(subsample.len())?;
    let sorted = sorted_copy(subsample);
    let sub_sd = Moments::from_chunks(subsample).std_dev();
    let h = bandwidth_for(&sorted, sub_sd, opts)?;
    let density = kde_on_grid(subsample, h, opts.kde_grid)?;
    let stats = stats_from(moments, median_sorted(&sorted), density.argmax());
    let reliability = reliability_sorted(&sorted, &density.grid);
    Ok((stats, density, reliability))
}

pub fn summary_stats(sample: &TtfSample) -> Result<SummaryStats> {
    summarize(&sample.values, &StatsOptions::default())
}

pub fn summarize(values: &[f64], opts: &StatsOptions) -> Result<SummaryStats> {
    analyze(values, opts).map(|(s, _, _)| s)
}

pub fn gaussian_kde(
    values: &[f64],
    grid_points: usize,
    bandwidth_override: Option<f64>,
) -> Result<DensityEstimate> {
    if bandwidth_override.is_none() {
        check_count(values.len())?;
    }
    let sorted = sorted_copy(values);
    let sd = Moments::from_chunks(values).std_dev();
    let opts = StatsOptions {
        kde_grid: grid_points,
        bandwidth: bandwidth_override,
    };
    let h = bandwidth_for(&sorted, sd, &opts)?;
    kde_on_grid(values, h, grid_points)
}

/// Argmax of the default KDE.
pub fn mode_estimate(values: &[f64]) -> Result<f64> {
    Ok(gaussian_kde(values, DEFAULT_GRID_POINTS, None)?.argmax())
}

fn reliability_sorted(sorted: &[f64], t_grid: &[f64]) -> ReliabilityCurve {
    let n = sorted.len() as f64;
    let survival = t_grid
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&v| v <= t);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect();
    ReliabilityCurve {
        t_grid: t_grid.to_vec(),
        survival,
    }
}

/// Fraction of values strictly greater than each `t`.
pub fn empirical_reliability(values: &[f64], t_grid: &[f64]) -> Result<ReliabilityCurve> {
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config {
            field: "t_grid",
            reason: "must be increasing".into(),
        });
    }
    if values.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    Ok(reliability_sorted(&sorted_copy(values), t_grid))
}

pub fn hazard_estimate(density: &DensityEstimate, reliability: &ReliabilityCurve) -> Result<HazardCurve> {
    if density.grid != reliability.t_grid {
        return Err(Error::GridMismatch);
    }
    let rate = density
        .density
        .iter()
        .zip(&reliability.survival)
        .map(|(&f, &s)| (s >= HAZARD_MIN_SURVIVAL).then(|| f / s))
        .collect();
    Ok(HazardCurve {
        t_grid: density.grid.clone(),
        rate,
    })
}

fn ratio(x: f64, base: f64) -> Option<f64> {
    (base != 0.0 && base.is_finite()).then(|| x / base)
}

pub(crate) fn relative_curves(entries: &[SweepEntry], baseline: &SummaryStats) -> RelativeCurves {
    let mut out = RelativeCurves::default();
    for e in entries {
        out.p.push(e.p);
        out.mean.push(ratio(e.stats.mean, baseline.mean));
        out.median.push(ratio(e.stats.median, baseline.median));
        out.mode.push(ratio(e.stats.mode, baseline.mode));
        out.std_dev.push(ratio(e.stats.std_dev, baseline.std_dev));
    }
    out
}

pub fn relative_stats(result: &SweepResult) -> RelativeCurves {
    relative_curves(&result.entries, &result.baseline)
}
