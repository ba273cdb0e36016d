//! JSON and CSV output documents.
//!
//! CSV numbers use the shortest decimal that parses back to the same `f64`;
//! undefined statistics are written as empty fields.

use serde::{Deserialize, Serialize};

use crate::engine::{CellResult, ScenarioConfig, SweepResult};
use crate::error::{Error, Result};
use crate::estimators::{hazard_estimate, DensityEstimate, SummaryStats};

pub const TOOL_NAME: &str = "moonlab";

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 19] = [
    "model",
    "n",
    "m",
    "shape",
    "scale",
    "samples",
    "seed",
    "p",
    "mean",
    "mean_stderr",
    "median",
    "mode",
    "std_dev",
    "skewness",
    "kurtosis_excess",
    "rel_mean",
    "rel_median",
    "rel_mode",
    "rel_std_dev",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration, defaults applied.
    pub config: serde_json::Value,
    pub timestamp: String,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value, timestamp: String) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: crate::VERSION.to_string(),
            command: command.to_string(),
            config,
            timestamp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPayload {
    pub t_grid: Vec<f64>,
    pub survival: Vec<f64>,
    /// Failure rate on the same grid; `null` where survival is below 1%.
    pub hazard: Vec<Option<f64>>,
}

/// Output of a single-cell simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub metadata: Metadata,
    pub stats: SummaryStats,
    pub density: DensityEstimate,
    pub reliability: ReliabilityPayload,
}

impl SimulationDocument {
    pub fn new(metadata: Metadata, cell: CellResult) -> Result<Self> {
        let hazard = hazard_estimate(&cell.density, &cell.reliability)?;
        Ok(Self {
            metadata,
            stats: cell.stats,
            density: cell.density,
            reliability: ReliabilityPayload {
                t_grid: cell.reliability.t_grid,
                survival: cell.reliability.survival,
                hazard: hazard.rate,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub metadata: Metadata,
    pub sweep: SweepResult,
}

/// One row of the sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub shape: f64,
    pub scale: f64,
    pub samples: usize,
    pub seed: u64,
    pub p: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub median: f64,
    pub mode: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis_excess: Option<f64>,
    pub rel_mean: Option<f64>,
    pub rel_median: Option<f64>,
    pub rel_mode: Option<f64>,
    pub rel_std_dev: Option<f64>,
}

/// Single-cell CSV row: the sweep columns without the relative statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub shape: f64,
    pub scale: f64,
    pub samples: usize,
    pub seed: u64,
    pub p: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub median: f64,
    pub mode: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis_excess: Option<f64>,
}

impl CellRow {
    pub fn new(cfg: &ScenarioConfig, s: &SummaryStats) -> Self {
        Self {
            model: cfg.dep.model.as_str().to_string(),
            n: cfg.arch.n_components,
            m: cfg.arch.m_required,
            shape: cfg.dist.shape,
            scale: cfg.dist.scale,
            samples: cfg.samples,
            seed: cfg.seed,
            p: cfg.dep.p,
            mean: s.mean,
            mean_stderr: s.mean_std_error,
            median: s.median,
            mode: s.mode,
            std_dev: s.std_dev,
            skewness: s.skewness,
            kurtosis_excess: s.kurtosis_excess,
        }
    }
}

pub fn sweep_rows(result: &SweepResult) -> Vec<SweepRow> {
    let b = &result.config.base;
    result
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| SweepRow {
            model: b.model.as_str().to_string(),
            n: b.arch.n_components,
            m: b.arch.m_required,
            shape: b.dist.shape,
            scale: b.dist.scale,
            samples: b.samples,
            seed: b.seed,
            p: e.p,
            mean: e.stats.mean,
            mean_stderr: e.stats.mean_std_error,
            median: e.stats.median,
            mode: e.stats.mode,
            std_dev: e.stats.std_dev,
            skewness: e.stats.skewness,
            kurtosis_excess: e.stats.kurtosis_excess,
            rel_mean: result.relative.mean[i],
            rel_median: result.relative.median[i],
            rel_mode: result.relative.mode[i],
            rel_std_dev: result.relative.std_dev[i],
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config {
        field: "csv",
        reason: e.to_string(),
    }
}

fn write_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config {
        field: "csv",
        reason: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Config {
        field: "csv",
        reason: e.to_string(),
    })
}

pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    write_csv(&sweep_rows(result))
}

pub fn cell_csv(cfg: &ScenarioConfig, stats: &SummaryStats) -> Result<String> {
    write_csv(&[CellRow::new(cfg, stats)])
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != SWEEP_COLUMNS {
        return Err(Error::Config {
            field: "csv",
            reason: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependency::DependencyModel;
    use crate::distribution::DistributionSpec;
    use crate::engine::{sweep, ArchitectureSpec, SweepBase, SweepConfig};

    fn small_sweep() -> SweepResult {
        let base = SweepBase {
            arch: ArchitectureSpec::new(2, 3).unwrap(),
            model: DependencyModel::GlobalCcf,
            dist: DistributionSpec::EXPONENTIAL,
            samples: 20_000,
            seed: 3,
        };
        sweep(&SweepConfig::new(base, vec![0.0, 0.3, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn sweep_csv_header_and_roundtrip() {
        let r = small_sweep();
        let text = sweep_csv(&r).unwrap();
        assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        let rows = parse_sweep_csv(&text).unwrap();
        assert_eq!(rows, sweep_rows(&r));
        assert_eq!(rows[0].rel_mean, Some(1.0));
    }

    #[test]
    fn undefined_values_are_empty_fields() {
        let mut r = small_sweep();
        r.entries[1].stats.skewness = None;
        let text = sweep_csv(&r).unwrap();
        let line = text.lines().nth(2).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[13], "");
        let rows = parse_sweep_csv(&text).unwrap();
        assert_eq!(rows[1].skewness, None);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(parse_sweep_csv("a,b\n1,2\n").is_err());
    }
}
