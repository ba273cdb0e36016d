use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moonlab_core::DependencyModel;

#[derive(Parser, Debug)]
#[command(name = "moonlab", version, about = "Monte Carlo workbench for M-out-of-N systems with dependent components")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one (model, M, N, p) cell.
    Simulate(SimulateArgs),
    /// Simulate a grid of coupling probabilities.
    Sweep(SweepArgs),
    /// Evaluate analytic reliability or mean.
    Oracle(OracleArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Linear,
    GlobalCcf,
    MarginalCcf,
}

impl From<ModelArg> for DependencyModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Linear => DependencyModel::Linear,
            ModelArg::GlobalCcf => DependencyModel::GlobalCcf,
            ModelArg::MarginalCcf => DependencyModel::MarginalCcf,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Number of components.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Components required for the system to work.
    #[arg(long)]
    pub m: usize,
    /// Weibull shape of every component.
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    /// Weibull scale of every component.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid points of the density estimate.
    #[arg(long, default_value_t = 512)]
    pub kde_grid: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Coupling probability.
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of equally spaced p values from 0 to 1.
    #[arg(long, default_value_t = 20, conflicts_with = "p_list")]
    pub p_grid: usize,
    /// Explicit p values, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Include per-p density and survival curves (JSON only).
    #[arg(long)]
    pub curves: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Times at which to evaluate the reliability.
    #[arg(long, value_delimiter = ',', required_unless_present = "mean", conflicts_with = "mean")]
    pub t: Option<Vec<f64>>,
    /// Evaluate the mean time to failure.
    #[arg(long)]
    pub mean: bool,
    /// Allow numerical quadrature where no closed form exists.
    #[arg(long)]
    pub quadrature: bool,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Samples per Monte Carlo check; tolerances widen below the default.
    #[arg(long, default_value_t = moonlab_core::acceptance::REFERENCE_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub canary_invert_m: bool,
}
