use thiserror::Error;

/// Errors raised across the simulation, estimation and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("invalid architecture: M={m}, N={n} (need 1 <= M <= N)")]
    Architecture { m: usize, n: usize },
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("sample count {requested} exceeds the materialization limit of {limit} values")]
    TooLarge { requested: usize, limit: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate sample: zero spread and no bandwidth override")]
    DegenerateSample,
    #[error("grid mismatch between density and reliability curves")]
    GridMismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate}, error {error_estimate} after {evaluations} evaluations")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
