use thiserror::Error;

/// Errors raised by graph construction, solvers and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("node {node} has zero degree; normalized operators are undefined")]
    DegenerateDegree { node: usize },

    #[error("iteration did not converge after {iterations} steps (last step norm {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("linear solve failed: residual {residual:e} exceeds bound {bound:e}")]
    Numeric { residual: f64, bound: f64 },

    #[error("leave-one-out run for node {left_out} failed: {source}")]
    Run {
        left_out: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotConverged { .. } | Error::Numeric { .. } => true,
            Error::Run { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
