use thiserror::Error;

use crate::exprlang::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point:?} lies outside the closed domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("point {point:?} is closer than {margin:e} to the boundary")]
    TooCloseToBoundary { point: Vec<f64>, margin: f64 },

    #[error("non-finite argument {value} passed to {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}])")]
    NonConvergence {
        what: &'static str,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("{what} overflowed")]
    Overflow { what: &'static str },

    #[error(
        "integrability condition at zero fails at {point:?}: local exponent {exponent:.6} <= -1"
    )]
    P3Violation { point: Vec<f64>, exponent: f64 },

    #[error("tail integral diverges: estimated exponent {exponent:.6} >= -1")]
    DivergentTail { exponent: f64 },

    #[error("quadrature did not reach tolerance: error estimate {error:e}, target {target:e}")]
    Quadrature { error: f64, target: f64 },

    #[error("missing certification: {0}")]
    MissingCertification(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("grid function: {0}")]
    Grid(String),

    #[error("evaluation failed at cell {cell:?}: {source}")]
    Cell {
        cell: Vec<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by the numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. }
            | Error::Overflow { .. }
            | Error::Quadrature { .. }
            | Error::DivergentTail { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True when the failure is a floating-point overflow somewhere below.
    pub fn is_overflow(&self) -> bool {
        match self {
            Error::Overflow { .. } => true,
            Error::Eval(e) => e.is_overflow(),
            Error::Cell { source, .. } => source.is_overflow(),
            _ => false,
        }
    }
}
