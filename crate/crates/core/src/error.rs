use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank deficient matrix: {deficient} of {cols} columns are numerically dependent")]
    RankDeficient { deficient: usize, cols: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("polygon is not normalized: {0}")]
    NotNormalized(String),

    #[error("quadrature degree {requested} exceeds the supported maximum {max}")]
    DegreeTooHigh { requested: usize, max: usize },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("non-finite state detected at step {step}")]
    NonFinite { step: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) | Error::InvalidPolygon(_)
        )
    }
}
