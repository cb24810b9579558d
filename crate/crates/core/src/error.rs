use thiserror::Error;

/// Errors raised by the simulator.
///
/// Adversarial interference never surfaces here; it shows up as an error
/// rate in the session result.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state has {0} amplitudes, above the cap of {cap}", cap = crate::state::MAX_AMPLITUDES)]
    TooLarge(usize),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("outcome {outcome} has probability {probability:e}, below the impossibility cutoff")]
    ImpossibleOutcome { outcome: usize, probability: f64 },
    #[error("subsystems {0:?} are entangled with the rest of the state")]
    NotSeparable(Vec<String>),
    #[error("dimension {0} is not prime")]
    NotPrime(usize),
    #[error("transcript: {0}")]
    Transcript(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
