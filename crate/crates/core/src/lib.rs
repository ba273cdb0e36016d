//! Monte Carlo workbench for M-out-of-N architectures with dependent
//! component lifetimes.
//!
//! Component lifetimes are coupled to a shared covariate through one of three
//! dependency models (linear mixing, global common-cause failure, per-component
//! common-cause failure). The system fails at the `(N-M+1)`-th component
//! failure. The crate simulates that failure time, summarizes it, and checks
//! the simulation against exact and quadrature-based reliability functions.

pub mod acceptance;
pub mod dependency;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod oracles;
pub mod report;
pub mod rng;

pub use dependency::{DependencyConfig, DependencyModel};
pub use distribution::DistributionSpec;
pub use engine::{ArchitectureSpec, ScenarioConfig, SweepBase, SweepConfig, SweepResult, TtfSample};
pub use error::{Error, Result};
pub use estimators::{DensityEstimate, ReliabilityCurve, StatsOptions, SummaryStats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
