use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("brute force refused: {num_vars} variables exceeds cap {cap}")]
    BruteForceCap { num_vars: usize, cap: usize },

    #[error("gadget self-check failed: {0}")]
    GadgetSelfCheck(String),

    #[error("state norm {norm} deviates from 1 by more than the tolerance")]
    NotNormalized { norm: f64 },

    #[error("dimension {0} is odd; a perfect matching needs an even dimension")]
    OddDimension(usize),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget exceeded: {needed} outcomes > {budget}")]
    EnumerationBudget { needed: u128, budget: u128 },

    #[error("rejection sampling budget of {0} draws exhausted")]
    RejectionBudget(usize),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("dimension unsupported for exact E_F: {0}")]
    UnsupportedDimension(usize),
}

impl Error {
    /// True for refusals caused by violated preconditions or caps rather than
    /// malformed input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::BruteForceCap { .. }
                | Error::EnumerationBudget { .. }
                | Error::RejectionBudget(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
