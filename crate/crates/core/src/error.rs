use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("outside formula domain: {0}")]
    Domain(String),

    #[error("infeasible: {message} (minimal achievable residual {min_residual:e})")]
    Infeasible { message: String, min_residual: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
