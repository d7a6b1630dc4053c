use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: &'static str },

    #[error("finite-difference stencil leaves the domain at {context}")]
    StencilOutOfDomain { context: &'static str },

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {last:e})")]
    NonConvergence { iterations: usize, last: f64, history: Vec<f64> },

    #[error("damped Newton step lost positivity after exhausting all halvings")]
    PositivityLost { history: Vec<f64> },

    #[error("coefficient fit failed: {0}")]
    FitFailure(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub(crate) fn domain(what: &'static str, value: f64) -> LabError {
    LabError::Domain { what, value }
}
