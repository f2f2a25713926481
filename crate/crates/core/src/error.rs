use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("size guard violated: {0}")]
    Guard(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("projection infeasible (residual {residual:.3e} after {iterations} iterations)")]
    Infeasible { residual: f64, iterations: usize },
    #[error("no convergence within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("eigendecomposition failed")]
    Eigen,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Guard(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParams(msg.into()))
}
