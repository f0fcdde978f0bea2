use thiserror::Error;

/// Errors surfaced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("log-gamma pole: {0} is a non-positive integer")]
    GammaPole(f64),

    #[error("argument must be positive, got {value}")]
    NonPositiveArgument { value: f64 },

    #[error("sample is empty")]
    EmptySample,

    #[error("sample entry {index} is not a positive number ({value})")]
    InvalidSampleEntry { index: usize, value: f64 },

    #[error("[G0] violated: |M_3/2[g]({t})| = {modulus:e} is numerically zero")]
    G0Violation { t: f64, modulus: f64 },

    #[error("degenerate heuristic estimate: positive part integrates to zero")]
    DegenerateEstimate,

    #[error("estimate grid does not cover the truth (x_max {x_max} < x_max_eff {x_max_eff})")]
    GridMismatch { x_max: f64, x_max_eff: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("admissible cut-off grid is empty")]
    EmptyKGrid,

    #[error("rate fit needs at least 3 sample sizes, got {0}")]
    TooFewRatePoints(usize),

    #[error("{excluded} of {total} replications degenerated (policy limit 5%)")]
    TooManyExclusions { excluded: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
