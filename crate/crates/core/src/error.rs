use thiserror::Error;

/// Errors produced by the modelling, simulation and ingestion routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("correlation matrix is singular (condition number {condition:.3e})")]
    SingularCorrelation { condition: f64 },

    #[error("support mismatch: {zero} of {total} samples have zero baseline density")]
    SupportMismatch { zero: usize, total: usize },

    #[error("noise map mismatch: {0}")]
    NoiseMapMismatch(String),

    #[error("no acceptable perturbation after {attempts} proposals")]
    PerturbationExhausted { attempts: usize },

    #[error("observable bound violated: sampled |<O_x>| = {observed} exceeds c = {c}")]
    ObservableBound { observed: f64, c: f64 },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: value {value} for {metric} outside its physical domain")]
    OutOfDomain { row: usize, metric: String, value: f64 },

    #[error("row {row}: date {date} for {metric} is not after the previous observation")]
    DateOrder { row: usize, metric: String, date: String },

    #[error("missing metrics: {}", .0.join(", "))]
    MissingMetrics(Vec<String>),

    #[error("insufficient data for {label}: {message}")]
    InsufficientData { label: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
