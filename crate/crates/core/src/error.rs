use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("resolution overflow: {required} nodes required, cap is {cap}")]
    ResolutionOverflow { required: u64, cap: u64 },

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }

    /// Errors that signal a resource limit rather than a wrong answer.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            LabError::CapacityExceeded(_) | LabError::ResolutionOverflow { .. } | LabError::Overflow(_)
        )
    }
}
