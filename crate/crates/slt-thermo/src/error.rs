use crate::model::{ModelId, ProbeId};
use thiserror::Error;

/// Library-wide error type. Variants mirror the failure modes of the
/// estimators, models and samplers rather than wrapping foreign errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("all counts are zero")]
    EmptyDistribution,

    #[error("data range has zero width")]
    DegenerateSupport,

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("grid must be strictly increasing")]
    InvalidGrid,

    #[error("non-finite density: {0}")]
    NonFiniteDensity(&'static str),

    #[error("probe {probe:?} is not differentiable; tilted sampling needs rwm")]
    NonDifferentiableProbe { probe: ProbeId },

    #[error("probe {probe:?} is not valid for model {model:?}")]
    InvalidProbe { probe: ProbeId, model: ModelId },

    #[error("split R-hat needs at least two chains with four draws each")]
    SingleChainError,

    #[error("empty dataset")]
    EmptyData,

    #[error("probe variance is zero")]
    DegenerateProbe,

    #[error("no finite initial point found after {tries} attempts")]
    InitializationFailure { tries: usize },

    #[error("invalid value at {path}: {reason}")]
    InvalidValue { path: String, reason: String },
}

impl Error {
    pub fn invalid_value(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
