use thiserror::Error;

/// Errors raised anywhere in the jet pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("jet order {have} is too low, need at least {needed}")]
    InsufficientOrder { needed: usize, have: usize },

    #[error("arity mismatch: expected {expected} inner jets, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("connection is not symmetric in its lower indices: {0}")]
    Asymmetric(String),

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown catalog map `{0}`")]
    UnknownMap(String),

    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParams { name: String, reason: String },

    #[error("operation not supported on the {backend} backend: {what}")]
    Unsupported { backend: &'static str, what: String },

    #[error("no preimage available: {0}")]
    NoPreimage(String),

    #[error("integrator step size underflow (h = {0:e})")]
    StepUnderflow(f64),

    #[error("interpolation failed: {0}")]
    Interpolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
