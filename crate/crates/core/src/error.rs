use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A computed size exceeds the representable range or a configured limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Arguments violate an operation's preconditions.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge (residual {residual:e} after {iterations} iterations)")]
    Solver { residual: f64, iterations: usize },

    /// A shot plan does not cover every Hamiltonian term exactly once.
    #[error("measurement plan error: {0}")]
    Plan(String),

    #[error("optimizer error: {0}")]
    Optimize(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
