use serde::Serialize;

use moonlab_core::acceptance::{run_suite_with, SuiteOptions};
use moonlab_core::engine::{run_cell, sweep_with, uniform_p_grid, SweepOptions, DEFAULT_MATERIALIZE_LIMIT};
use moonlab_core::oracles::{model_mean, model_reliability};
use moonlab_core::report::{cell_csv, sweep_csv, Metadata, SimulationDocument, SweepDocument};
use moonlab_core::{
    ArchitectureSpec, DependencyModel, DistributionSpec, StatsOptions, SweepBase, SweepConfig,
};

use crate::args::{OracleArgs, ScenarioArgs, SelftestArgs, SimulateArgs, SweepArgs};
use crate::output::{emit, round15, timestamp, to_json};

#[derive(Debug)]
pub enum Failure {
    /// A selftest criterion failed; the table already says which.
    Acceptance,
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Acceptance => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            Failure::Acceptance => None,
            Failure::Usage(m) | Failure::Io(m) => Some(m),
        }
    }
}

impl From<moonlab_core::Error> for Failure {
    fn from(e: moonlab_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn sweep_base(a: &ScenarioArgs) -> Result<SweepBase, Failure> {
    Ok(SweepBase {
        arch: ArchitectureSpec::new(a.m, a.n)?,
        model: a.model.into(),
        dist: DistributionSpec::new(a.shape, a.scale)?,
        samples: a.samples,
        seed: a.seed,
    })
}

fn stats_options(a: &ScenarioArgs) -> Result<StatsOptions, Failure> {
    if a.kde_grid < 2 {
        return Err(Failure::Usage(format!("--kde-grid must be at least 2, got {}", a.kde_grid)));
    }
    Ok(StatsOptions {
        kde_grid: a.kde_grid,
        bandwidth: None,
    })
}

#[derive(Serialize)]
struct SimulateEcho {
    model: DependencyModel,
    n: usize,
    m: usize,
    p: f64,
    shape: f64,
    scale: f64,
    samples: usize,
    seed: u64,
    kde_grid: usize,
    format: &'static str,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let s = &a.scenario;
    let cfg = sweep_base(s)?.at(a.p);
    cfg.validate()?;
    let opts = stats_options(s)?;
    let cell = run_cell(&cfg, &opts, DEFAULT_MATERIALIZE_LIMIT)?;
    let text = match a.format {
        crate::args::Format::Csv => cell_csv(&cfg, &cell.stats)?,
        crate::args::Format::Json => {
            let echo = SimulateEcho {
                model: cfg.dep.model,
                n: s.n,
                m: s.m,
                p: a.p,
                shape: s.shape,
                scale: s.scale,
                samples: s.samples,
                seed: s.seed,
                kde_grid: s.kde_grid,
                format: a.format.as_str(),
            };
            let meta = Metadata::new("simulate", json_value(&echo)?, timestamp());
            to_json(&SimulationDocument::new(meta, cell)?)?
        }
    };
    emit(s.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SweepEcho {
    model: DependencyModel,
    n: usize,
    m: usize,
    p_grid: Vec<f64>,
    shape: f64,
    scale: f64,
    samples: usize,
    seed: u64,
    kde_grid: usize,
    format: &'static str,
    curves: bool,
}

pub fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let s = &a.scenario;
    let p_grid = match &a.p_list {
        Some(list) => list.clone(),
        None => uniform_p_grid(a.p_grid),
    };
    let cfg = SweepConfig::new(sweep_base(s)?, p_grid)?;
    let opts = SweepOptions {
        stats: stats_options(s)?,
        keep_curves: a.curves,
        materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
    };
    let result = sweep_with(&cfg, &opts)?;
    let text = match a.format {
        crate::args::Format::Csv => sweep_csv(&result)?,
        crate::args::Format::Json => {
            let echo = SweepEcho {
                model: cfg.base.model,
                n: s.n,
                m: s.m,
                p_grid: cfg.p_grid.clone(),
                shape: s.shape,
                scale: s.scale,
                samples: s.samples,
                seed: s.seed,
                kde_grid: s.kde_grid,
                format: a.format.as_str(),
                curves: a.curves,
            };
            let meta = Metadata::new("sweep", json_value(&echo)?, timestamp());
            to_json(&SweepDocument {
                metadata: meta,
                sweep: result,
            })?
        }
    };
    emit(s.out.as_deref(), &text)
}

#[derive(Serialize)]
struct OracleEcho {
    model: DependencyModel,
    n: usize,
    m: usize,
    p: f64,
    shape: f64,
    scale: f64,
    quadrature: bool,
}

#[derive(Serialize)]
struct OracleDocument {
    metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reliability: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
}

pub fn oracle(a: &OracleArgs) -> Result<(), Failure> {
    let arch = ArchitectureSpec::new(a.m, a.n)?;
    let dist = DistributionSpec::new(a.shape, a.scale)?;
    let model: DependencyModel = a.model.into();
    let echo = OracleEcho {
        model,
        n: a.n,
        m: a.m,
        p: a.p,
        shape: a.shape,
        scale: a.scale,
        quadrature: a.quadrature,
    };
    let mut doc = OracleDocument {
        metadata: Metadata::new("oracle", json_value(&echo)?, timestamp()),
        t: None,
        reliability: None,
        mean: None,
    };
    if a.mean {
        doc.mean = Some(round15(model_mean(model, a.p, &arch, &dist, a.quadrature)?));
    } else if let Some(ts) = &a.t {
        let r = ts
            .iter()
            .map(|&t| model_reliability(model, t, a.p, &arch, &dist).map(round15))
            .collect::<Result<Vec<_>, _>>()?;
        doc.t = Some(ts.clone());
        doc.reliability = Some(r);
    }
    emit(None, &to_json(&doc)?)
}

pub fn selftest(a: &SelftestArgs) -> Result<(), Failure> {
    let opts = SuiteOptions {
        samples: a.samples,
        seed: a.seed,
        invert_m: a.canary_invert_m,
        ..SuiteOptions::default()
    };
    let report = run_suite_with(&opts, |o| println!("{}", o.line()));
    if let Some(summary) = report.table().lines().last() {
        println!("{summary}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn json_value<T: Serialize>(v: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Io(e.to_string()))
}
