use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u32 },

    #[error("model synthesis failed: {0}")]
    SynthesisFailed(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("conditioning matrix is ill-conditioned (condition estimate {condition:e})")]
    Conditioning { condition: f64 },

    #[error("every conditioning set failed for pair ({i}, {j})")]
    EstimationFailed { i: usize, j: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
