use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid frame parameters: {0}")]
    InvalidFrame(String),

    #[error("frame operator is singular (smallest singular value {sigma:.3e} relative)")]
    SingularFrame { sigma: f64 },

    #[error("grid spacing {spacing} is too coarse (limit {limit})")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("grid is not compatible with the lattice: {0}")]
    GridIncompatible(String),

    #[error("quadrature failed for {context}: estimated error {error:.3e} exceeds {tolerance:.3e}")]
    QuadratureFailure {
        context: String,
        error: f64,
        tolerance: f64,
    },

    #[error("index ({q}, {p}, {d}) outside table bounds")]
    Index { q: i64, p: i64, d: i64 },

    #[error("exponent overflow guard tripped for argument {re} + {im}j")]
    OverflowGuard { re: f64, im: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dense system with {unknowns} unknowns exceeds the cap of {cap}")]
    SizeCap { unknowns: usize, cap: usize },

    #[error("iterative solver stalled after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration error at {field}: {message}")]
    Config { field: String, message: String },

    #[error("table cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::InvalidFrame(_) => "InvalidFrame",
            Error::SingularFrame { .. } => "SingularFrame",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::GridIncompatible(_) => "GridIncompatible",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::Index { .. } => "IndexError",
            Error::OverflowGuard { .. } => "OverflowGuard",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SizeCap { .. } => "SizeCap",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::SingularMatrix => "SingularMatrix",
            Error::GridMismatch(_) => "GridMismatch",
            Error::Config { .. } => "ConfigError",
            Error::Cache(_) => "CacheError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
