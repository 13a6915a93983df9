use thiserror::Error;

/// Errors raised by the evaluators, solvers and file readers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shell parameters: {0}")]
    InvalidParams(String),

    #[error("R/L_d = {ratio} must exceed 1/2 for a real beta")]
    BetaImaginary { ratio: f64 },

    #[error("invalid spherical point: {0}")]
    InvalidPoint(String),

    #[error("points are coincident or nearly so (cos gamma = {cos_gamma})")]
    DegenerateSeparation { cos_gamma: f64 },

    #[error("argument {x} outside [-1, 1]")]
    ArgOutOfRange { x: f64 },

    #[error("double-double division by zero")]
    DivByZero,

    #[error("kernel is singular at gamma = {gamma}")]
    Singular { gamma: f64 },

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("truncation of {requested} terms exceeds the limit of {limit}")]
    TruncationTooLarge { requested: u64, limit: u64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {estimate:e})")]
    NoConvergence { subdivisions: usize, estimate: f64 },

    #[error("log-gamma domain error: Re z = {re} must be positive")]
    DomainError { re: f64 },

    #[error("grid {n_theta}x{n_phi} cannot resolve degree {l_max}")]
    UnderResolved {
        n_theta: usize,
        n_phi: usize,
        l_max: usize,
    },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
