use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("vertex index {index} out of range for n = {n}")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid spin value {0}; expected -1 or +1")]
    InvalidSpin(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empirical covariance is ill-conditioned: lambda_min = {lambda_min:e} < tolerance {tolerance:e}")]
    IllConditioned { lambda_min: f64, tolerance: f64 },

    #[error("eigen-decomposition did not converge")]
    EigenFailure,

    #[error("n = {n} exceeds the enumeration cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("parameters lie outside the feasible box")]
    OutsideBox,

    #[error("non-finite gradient at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("hypergraph has no edge of the maximum cardinality m = {m}")]
    NoTopEdges { m: usize },

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
