use crate::geometry::ModelSpace;
use thiserror::Error;

/// Errors raised by the geometric kernels, the walk sampler and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("model mismatch: expected {expected}, found {found}")]
    ModelMismatch { expected: ModelSpace, found: ModelSpace },
    /// Bad arguments: out-of-range parameters, degenerate inputs, malformed coordinates.
    #[error("usage error: {0}")]
    Usage(String),
    /// The input is well formed but outside the domain of the operation
    /// (e.g. asking for the axis of a parabolic element).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    /// An estimator refused to run because its hypotheses were not certified.
    #[error("refused: {0}")]
    Refused(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> LabError {
    LabError::Usage(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> LabError {
    LabError::Domain(msg.into())
}

pub(crate) fn same_model(expected: ModelSpace, found: ModelSpace) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(LabError::ModelMismatch { expected, found })
    }
}
