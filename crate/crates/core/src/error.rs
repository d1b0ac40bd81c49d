use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("absolute continuity violated at support index {index}: numerator mass {mass} where reference mass is zero")]
    AbsoluteContinuityViolation { index: usize, mass: f64 },

    #[error("invalid probabilities at {field}: {reason}")]
    InvalidProbabilities { field: String, reason: String },

    #[error("duplicate support label {0:?}")]
    DuplicateLabel(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("transport program infeasible or did not converge: {0}")]
    InfeasibleLp(String),

    #[error("sample index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("data distribution mismatch: {0}")]
    DataDistMismatch(String),

    #[error("enumeration size {size} exceeds cap {cap}")]
    SizeCapExceeded { size: u128, cap: u128 },

    #[error("bound requires i.i.d. training samples")]
    NonIidInput,

    #[error("covariance is not positive definite: {0}")]
    NonPositiveDefinite(String),

    #[error("quadrature window too small: tail mass {tail_mass:e} exceeds 1e-10")]
    WindowTooSmall { tail_mass: f64 },

    #[error("density integrates to {integral} over the window (drift > 1e-6)")]
    NormalizationDrift { integral: f64 },

    #[error("degenerate correlation {0}")]
    DegenerateCorrelation(f64),

    #[error("negative divergence input {0}")]
    NegativeDivergence(f64),

    #[error("Jensen-Shannon value {0} outside [0, ln 2]")]
    JsOutOfRange(f64),

    #[error("quadrature self-calibration failed: {what} off by {deviation:e} nats")]
    QuadratureCalibration { what: String, deviation: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
