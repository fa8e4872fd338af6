use thiserror::Error;

/// Errors raised by the geometry, curvature and stability kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input outside the domain of the operation: {0}")]
    InputDomain(String),
    #[error("anisotropy model is invalid: {0}")]
    ModelValidity(String),
    #[error("convexity assumption violated: {0}")]
    ConvexityViolation(String),
    #[error("degenerate metric at node {node} (det g = {det:e})")]
    DegenerateMetric { node: usize, det: f64 },
    #[error("index {value} out of range {range}")]
    OutOfRange { value: usize, range: String },
    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("positivity hypothesis violated: {0}")]
    PositivityHypothesis(String),
    #[error("speed field is not mean-zero: |∫f| = {0:e}")]
    NotMeanZero(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
