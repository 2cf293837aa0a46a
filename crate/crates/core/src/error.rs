use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is not connected")]
    NotConnected,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("trajectory is not admissible: {0}")]
    BadTrajectory(String),

    #[error("degenerate statistical comparison: {0}")]
    DegenerateTest(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("deserialization failed: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
