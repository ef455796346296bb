use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension n = {0} is not supported: the nonlinear exponent (n+4)/(n-4) degenerates for n <= 4")]
    InvalidDimension(i64),

    #[error("non-positive v = {0}: the power v^p requires v > 0")]
    NonPositiveV(f64),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("necksize epsilon = {eps} outside the admissible range [{lo}, {hi}]")]
    EpsilonOutOfRange { eps: f64, lo: f64, hi: f64 },

    #[error("shooting bracket not found: {0}")]
    NoBracket(String),

    #[error("profile invariant violated: {0}")]
    InvariantViolation(String),

    #[error("profile schema error: {0}")]
    Schema(String),

    #[error("profile checksum mismatch (stored {stored}, computed {computed})")]
    Checksum { stored: String, computed: String },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("evaluation at or too close to the singular point: {0}")]
    SingularPoint(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("truncated sum does not converge: {0}")]
    Divergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
