use std::fmt;

use thiserror::Error;

/// Which user evaluator produced a non-finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    Objective,
    ObjectiveGradient,
    ObjectiveHessian,
    Residual,
    Jacobian,
    ResidualHessian,
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Objective => "f",
            Self::ObjectiveGradient => "∇f",
            Self::ObjectiveHessian => "∇²f",
            Self::Residual => "c",
            Self::Jacobian => "J",
            Self::ResidualHessian => "H_c",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluator {evaluator} returned a non-finite value")]
pub struct EvalError {
    pub evaluator: Evaluator,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("quadratic penalty method is not applicable for omega = {0} (needs omega > 0)")]
    NotApplicable(f64),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
