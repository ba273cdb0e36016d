//! Request parsing, validation and the blocking compute behind each endpoint.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use moonlab_core::engine::{run_cell, sweep_with, uniform_p_grid, SweepOptions, DEFAULT_GRID_POINTS, DEFAULT_MATERIALIZE_LIMIT};
use moonlab_core::estimators::{hazard_estimate, RelativeCurves};
use moonlab_core::oracles::{model_mean, model_reliability};
use moonlab_core::report::ReliabilityPayload;
use moonlab_core::{
    ArchitectureSpec, DensityEstimate, DependencyModel, DistributionSpec, ReliabilityCurve, ScenarioConfig,
    StatsOptions, SummaryStats, SweepBase, SweepConfig,
};

use crate::error::{ApiError, FieldError};

/// Longest curve sent over the wire.
pub const MAX_CURVE_POINTS: usize = 1024;
pub const MAX_KDE_GRID: usize = 1 << 16;

pub fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "body".to_string() } else { path };
        ApiError::field(&field, e.inner().to_string())
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    Count(usize),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationRequest {
    pub model: Option<DependencyModel>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<f64>,
    pub p_grid: Option<PGrid>,
    pub shape: Option<f64>,
    pub scale: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub kde_grid: Option<usize>,
    #[serde(default)]
    pub include_oracle: bool,
}

/// A request with every default filled in; echoed back in responses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedRequest {
    pub model: DependencyModel,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    pub shape: f64,
    pub scale: f64,
    pub samples: usize,
    pub seed: u64,
    pub kde_grid: usize,
    pub include_oracle: bool,
}

impl ResolvedRequest {
    fn base(&self) -> SweepBase {
        SweepBase {
            arch: ArchitectureSpec {
                n_components: self.n,
                m_required: self.m,
            },
            model: self.model,
            dist: DistributionSpec {
                shape: self.shape,
                scale: self.scale,
            },
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn stats_options(&self) -> StatsOptions {
        StatsOptions {
            kde_grid: self.kde_grid,
            bandwidth: None,
        }
    }

    pub fn scenario(&self) -> ScenarioConfig {
        self.base().at(self.p.unwrap_or(0.0))
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            base: self.base(),
            p_grid: self.p_grid.clone().unwrap_or_default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Simulate,
    Sweep,
}

fn require<T>(v: Option<T>, field: &str, errors: &mut Vec<FieldError>) -> Option<T> {
    if v.is_none() {
        errors.push(FieldError {
            field: field.into(),
            reason: "is required".into(),
        });
    }
    v
}

fn push(errors: &mut Vec<FieldError>, e: ApiError) {
    if let ApiError::Invalid(mut list) = e {
        errors.append(&mut list);
    }
}

/// Applies defaults and checks every field, reporting all problems at once.
pub fn resolve(req: SimulationRequest, endpoint: Endpoint, sample_cap: usize) -> Result<ResolvedRequest, ApiError> {
    let mut errors = Vec::new();
    let model = require(req.model, "model", &mut errors);
    let m = require(req.m, "m", &mut errors);
    let (p, p_grid) = match endpoint {
        Endpoint::Simulate => {
            if req.p_grid.is_some() {
                errors.push(FieldError {
                    field: "p_grid".into(),
                    reason: "not accepted here; use the sweep endpoint".into(),
                });
            }
            (require(req.p, "p", &mut errors), None)
        }
        Endpoint::Sweep => {
            if req.p.is_some() {
                errors.push(FieldError {
                    field: "p".into(),
                    reason: "not accepted here; use p_grid".into(),
                });
            }
            let grid = match req.p_grid {
                None => uniform_p_grid(DEFAULT_GRID_POINTS),
                Some(PGrid::Count(c)) => uniform_p_grid(c),
                Some(PGrid::Values(v)) => v,
            };
            (None, Some(grid))
        }
    };
    let kde_grid = req.kde_grid.unwrap_or(StatsOptions::default().kde_grid);
    if !(2..=MAX_KDE_GRID).contains(&kde_grid) {
        errors.push(FieldError {
            field: "kde_grid".into(),
            reason: format!("must be between 2 and {MAX_KDE_GRID}"),
        });
    }
    let (Some(model), Some(m)) = (model, m) else {
        return Err(ApiError::Invalid(errors));
    };
    let resolved = ResolvedRequest {
        model,
        n: req.n.unwrap_or(3),
        m,
        p,
        p_grid,
        shape: req.shape.unwrap_or(1.0),
        scale: req.scale.unwrap_or(1.0),
        samples: req.samples.unwrap_or(1_000_000),
        seed: req.seed.unwrap_or(0),
        kde_grid,
        include_oracle: req.include_oracle,
    };
    if resolved.samples < 2 {
        errors.push(FieldError {
            field: "samples".into(),
            reason: "must be at least 2".into(),
        });
    }
    if let Err(e) = resolved.base().arch.validate() {
        push(&mut errors, e.into());
    }
    if let Err(e) = resolved.base().dist.validate() {
        push(&mut errors, e.into());
    }
    let probabilities = match endpoint {
        Endpoint::Simulate => resolved.p.and_then(|_| resolved.scenario().validate().err()),
        Endpoint::Sweep => resolved.sweep_config().validate().err(),
    };
    if let Some(e) = probabilities {
        let e: ApiError = e.into();
        if let ApiError::Invalid(list) = &e {
            for f in list {
                if !errors.iter().any(|g| g.field == f.field) {
                    errors.push(f.clone());
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(ApiError::Invalid(errors));
    }
    if resolved.samples > sample_cap {
        return Err(ApiError::TooLarge {
            requested: resolved.samples,
            cap: sample_cap,
        });
    }
    Ok(resolved)
}

/// Evenly spaced indices into a curve of `len` points, keeping both ends.
pub fn decimation_indices(len: usize, max_points: usize) -> Vec<usize> {
    if len <= max_points {
        return (0..len).collect();
    }
    let last = (len - 1) as f64;
    let steps = (max_points - 1) as f64;
    (0..max_points).map(|i| (i as f64 * last / steps).round() as usize).collect()
}

fn pick<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityPayload {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCurve {
    pub t_grid: Vec<f64>,
    pub reliability: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellPayload {
    pub p: f64,
    pub stats: SummaryStats,
    pub density: DensityPayload,
    pub reliability: ReliabilityPayload,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCurve>,
}

fn cell_payload(
    req: &ResolvedRequest,
    p: f64,
    stats: SummaryStats,
    density: &DensityEstimate,
    reliability: &ReliabilityCurve,
) -> Result<CellPayload, ApiError> {
    let hazard = hazard_estimate(density, reliability)?;
    let di = decimation_indices(density.grid.len(), MAX_CURVE_POINTS);
    let ri = decimation_indices(reliability.t_grid.len(), MAX_CURVE_POINTS);
    let t_grid = pick(&reliability.t_grid, &ri);
    let oracle = if req.include_oracle {
        let arch = req.base().arch;
        let dist = req.base().dist;
        let values = t_grid
            .par_iter()
            .map(|&t| model_reliability(req.model, t, p, &arch, &dist))
            .collect::<Result<Vec<_>, _>>()?;
        Some(OracleCurve {
            t_grid: t_grid.clone(),
            reliability: values,
        })
    } else {
        None
    };
    Ok(CellPayload {
        p,
        stats,
        density: DensityPayload {
            grid: pick(&density.grid, &di),
            density: pick(&density.density, &di),
            bandwidth: density.bandwidth,
        },
        reliability: ReliabilityPayload {
            t_grid,
            survival: pick(&reliability.survival, &ri),
            hazard: pick(&hazard.rate, &ri),
        },
        oracle,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub request: ResolvedRequest,
    #[serde(flatten)]
    pub cell: CellPayload,
}

pub fn simulate(req: &ResolvedRequest) -> Result<SimulationResult, ApiError> {
    let cfg = req.scenario();
    let cell = run_cell(&cfg, &req.stats_options(), DEFAULT_MATERIALIZE_LIMIT)?;
    Ok(SimulationResult {
        request: req.clone(),
        cell: cell_payload(req, cfg.dep.p, cell.stats, &cell.density, &cell.reliability)?,
    })
}

/// Per-p statistics as parallel arrays.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Series {
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub median: Vec<f64>,
    pub mode: Vec<f64>,
    pub std_dev: Vec<f64>,
    pub skewness: Vec<Option<f64>>,
    pub kurtosis_excess: Vec<Option<f64>>,
    pub rel_mean: Vec<Option<f64>>,
    pub rel_median: Vec<Option<f64>>,
    pub rel_mode: Vec<Option<f64>>,
    pub rel_std_dev: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResultPayload {
    pub request: ResolvedRequest,
    pub p: Vec<f64>,
    pub series: Series,
    pub baseline: SummaryStats,
    pub entries: Vec<CellPayload>,
}

pub fn sweep(req: &ResolvedRequest) -> Result<SweepResultPayload, ApiError> {
    let cfg = req.sweep_config();
    let opts = SweepOptions {
        stats: req.stats_options(),
        keep_curves: true,
        materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
    };
    let result = sweep_with(&cfg, &opts)?;
    let RelativeCurves {
        p,
        mean: rel_mean,
        median: rel_median,
        mode: rel_mode,
        std_dev: rel_std_dev,
    } = result.relative;
    let mut series = Series {
        rel_mean,
        rel_median,
        rel_mode,
        rel_std_dev,
        ..Series::default()
    };
    let mut entries = Vec::with_capacity(result.entries.len());
    for e in result.entries {
        let s = &e.stats;
        series.mean.push(s.mean);
        series.mean_stderr.push(s.mean_std_error);
        series.median.push(s.median);
        series.mode.push(s.mode);
        series.std_dev.push(s.std_dev);
        series.skewness.push(s.skewness);
        series.kurtosis_excess.push(s.kurtosis_excess);
        let (Some(density), Some(reliability)) = (e.density, e.reliability) else {
            return Err(ApiError::Internal("sweep dropped its curves".into()));
        };
        entries.push(cell_payload(req, e.p, e.stats, &density, &reliability)?);
    }
    Ok(SweepResultPayload {
        request: req.clone(),
        p,
        series,
        baseline: result.baseline,
        entries,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleRequest {
    pub model: DependencyModel,
    #[serde(default = "default_n")]
    pub n: usize,
    pub m: usize,
    pub p: f64,
    #[serde(default = "one")]
    pub shape: f64,
    #[serde(default = "one")]
    pub scale: f64,
    pub t: Option<Vec<f64>>,
    #[serde(default)]
    pub mean: bool,
    #[serde(default)]
    pub quadrature: bool,
}

fn default_n() -> usize {
    3
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleEcho {
    pub model: DependencyModel,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub shape: f64,
    pub scale: f64,
    pub quadrature: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub request: OracleEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reliability: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

pub fn check_oracle(req: &OracleRequest) -> Result<(), ApiError> {
    match (&req.t, req.mean) {
        (Some(_), true) => Err(ApiError::field("t", "give either t or mean, not both")),
        (None, false) => Err(ApiError::field("t", "give t or set mean to true")),
        _ => Ok(()),
    }
}

pub fn oracle(req: &OracleRequest) -> Result<OracleResult, ApiError> {
    check_oracle(req)?;
    let arch = ArchitectureSpec::new(req.m, req.n)?;
    let dist = DistributionSpec::new(req.shape, req.scale)?;
    let mut out = OracleResult {
        request: OracleEcho {
            model: req.model,
            n: req.n,
            m: req.m,
            p: req.p,
            shape: req.shape,
            scale: req.scale,
            quadrature: req.quadrature,
        },
        t: None,
        reliability: None,
        mean: None,
    };
    if req.mean {
        out.mean = Some(model_mean(req.model, req.p, &arch, &dist, req.quadrature)?);
    } else if let Some(ts) = &req.t {
        let r = ts
            .par_iter()
            .map(|&t| model_reliability(req.model, t, req.p, &arch, &dist))
            .collect::<Result<Vec<_>, _>>()?;
        out.t = Some(ts.clone());
        out.reliability = Some(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(json: &str) -> SimulationRequest {
        parse_body(json.as_bytes()).unwrap()
    }

    fn fields(e: ApiError) -> Vec<String> {
        match e {
            ApiError::Invalid(list) => list.into_iter().map(|f| f.field).collect(),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_are_filled_in() {
        let r = resolve(request(r#"{"model":"linear","m":2,"p":0.5}"#), Endpoint::Simulate, 10).unwrap_err();
        assert!(matches!(r, ApiError::TooLarge { requested: 1_000_000, cap: 10 }));
        let r = resolve(request(r#"{"model":"linear","m":2,"p":0.5}"#), Endpoint::Simulate, 10_000_000).unwrap();
        assert_eq!((r.n, r.shape, r.scale, r.seed, r.kde_grid), (3, 1.0, 1.0, 0, 512));
        let s = resolve(request(r#"{"model":"global-ccf","m":2}"#), Endpoint::Sweep, 10_000_000).unwrap();
        assert_eq!(s.p_grid.as_ref().unwrap().len(), 20);
        let s = resolve(request(r#"{"model":"global-ccf","m":2,"p_grid":5}"#), Endpoint::Sweep, 10_000_000).unwrap();
        assert_eq!(s.p_grid.unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn errors_name_fields() {
        let e = resolve(request(r#"{"model":"linear","m":0,"p":0}"#), Endpoint::Simulate, 100).unwrap_err();
        assert_eq!(fields(e), ["m"]);
        let e = resolve(request(r#"{"model":"linear","n":0,"m":1,"p":0}"#), Endpoint::Simulate, 100).unwrap_err();
        assert_eq!(fields(e), ["n"]);
        let e = resolve(request(r#"{"p":2}"#), Endpoint::Simulate, 100).unwrap_err();
        assert_eq!(fields(e), ["model", "m"]);
        let e = resolve(request(r#"{"model":"linear","m":1,"p":2,"shape":-1}"#), Endpoint::Simulate, 100).unwrap_err();
        assert_eq!(fields(e), ["shape", "p"]);
        let e = resolve(request(r#"{"model":"linear","m":1,"p_grid":[0.5,0.1]}"#), Endpoint::Sweep, 100).unwrap_err();
        assert_eq!(fields(e), ["p_grid"]);
        let e = resolve(request(r#"{"model":"linear","m":1,"p":0.1}"#), Endpoint::Sweep, 100).unwrap_err();
        assert_eq!(fields(e), ["p"]);
    }

    #[test]
    fn parse_errors_carry_a_path() {
        let e = parse_body::<SimulationRequest>(br#"{"model":"linear","m":-1}"#).unwrap_err();
        assert_eq!(fields(e), ["m"]);
        let e = parse_body::<SimulationRequest>(br#"{"model":"tree","m":1}"#).unwrap_err();
        assert_eq!(fields(e), ["model"]);
        let e = parse_body::<SimulationRequest>(br#"{"model":"linear","m":1,"bogus":1}"#).unwrap_err();
        assert_eq!(fields(e), ["bogus"]);
        let e = parse_body::<SimulationRequest>(b"not json").unwrap_err();
        assert_eq!(fields(e), ["body"]);
    }

    #[test]
    fn decimation_keeps_ends() {
        assert_eq!(decimation_indices(5, 1024), vec![0, 1, 2, 3, 4]);
        let idx = decimation_indices(4096, 1024);
        assert_eq!(idx.len(), 1024);
        assert_eq!((idx[0], idx[1023]), (0, 4095));
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn long_curves_are_decimated() {
        let req = resolve(
            request(r#"{"model":"marginal-ccf","m":2,"p":0.3,"samples":20000,"kde_grid":3000}"#),
            Endpoint::Simulate,
            100_000,
        )
        .unwrap();
        let r = simulate(&req).unwrap();
        assert_eq!(r.cell.density.grid.len(), MAX_CURVE_POINTS);
        assert_eq!(r.cell.reliability.t_grid.len(), MAX_CURVE_POINTS);
        assert_eq!(r.cell.reliability.hazard.len(), MAX_CURVE_POINTS);
    }
}
