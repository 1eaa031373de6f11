use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),

    #[error("degenerate system: C·A^(i)·B vanishes for every i < {order}")]
    DegenerateSystem { order: usize },

    #[error("zero at {re:+.6e}{im:+.6e}i lies within {margin:e} of the imaginary axis")]
    BoundaryZero { re: f64, im: f64, margin: f64 },

    #[error("pole at {re:+.6e}{im:+.6e}i is not strictly stable (margin {margin:e})")]
    UnstablePlant { re: f64, im: f64, margin: f64 },

    #[error("normal-form transformation failed: {0}")]
    TransformationFailure(String),

    #[error("internal dynamics not hyperbolic: eigenvalue real part {re:e} within margin {margin:e}")]
    HyperbolicityViolation { re: f64, margin: f64 },

    #[error("unsupported capability: {0}")]
    Capability(String),

    #[error("simulation diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("time {time} outside simulated horizon [0, {horizon}]")]
    Range { time: f64, horizon: f64 },

    #[error("input gain |k| = {0:e} is too small to invert")]
    SingularGain(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("row {row}: {source}")]
    Row { row: usize, source: Box<Error> },

    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: Box<Error> },
}

impl Error {
    /// True for violations of the plant assumptions (phase, stability, hyperbolicity).
    pub fn is_assumption_violation(&self) -> bool {
        match self {
            Error::BoundaryZero { .. }
            | Error::UnstablePlant { .. }
            | Error::HyperbolicityViolation { .. }
            | Error::DegenerateSystem { .. }
            | Error::SingularGain(_) => true,
            Error::Row { source, .. } | Error::Trial { source, .. } => source.is_assumption_violation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
