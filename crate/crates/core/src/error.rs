use thiserror::Error;

/// Errors raised anywhere in the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum CarmaError {
    /// A model, driver, grid or study parameter violates its invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The model violates one of the standing assumptions (stability, order, MA support).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A linear system turned out singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative method did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CarmaError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            CarmaError::InvalidInput(_) | CarmaError::InvalidModel(_) | CarmaError::Config(_) => 2,
            CarmaError::Singular(_) | CarmaError::NoConvergence(_) => 3,
            CarmaError::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CarmaError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CarmaError {
    CarmaError::InvalidInput(msg.into())
}
