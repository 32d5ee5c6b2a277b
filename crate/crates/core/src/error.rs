use thiserror::Error;

use crate::dsl::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A cumulant argument fell outside the exponential-moment domain.
    #[error("argument z = {z} is outside the cumulant domain {domain}")]
    Domain { z: f64, domain: String },

    #[error("Lévy measure moment of order {order} is not finite")]
    Moment { order: usize },

    #[error("invalid Lévy model: {0}")]
    InvalidModel(String),

    #[error("invalid curve-space configuration: {0}")]
    InvalidSpace(String),

    #[error("basis is numerically degenerate (Gram condition number {condition:.3e})")]
    DegenerateBasis { condition: f64 },

    #[error("basis is not invariant under d/dx (relative residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("maturity {tau} exceeds the grid horizon {x_max}")]
    Range { tau: f64, x_max: f64 },

    #[error("radius {r} must satisfy 0 < r < {limit}")]
    Radius { r: f64, limit: f64 },

    #[error("evaluation point lies outside the closed ball of radius {r} (distance {distance})")]
    OutsideBall { distance: f64, r: f64 },

    #[error("partial sums did not stabilize (estimated remainder {remainder:.3e})")]
    Divergence { remainder: f64 },

    #[error("numerical failure: {0}")]
    Numerics(String),

    #[error("no affine realization available: {0}")]
    NoRealization(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
