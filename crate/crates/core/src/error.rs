use thiserror::Error;

/// Errors raised by the simulator building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("PRBS seed must be a nonzero 15-bit state, got {0:#x}")]
    ZeroSeed(u16),
    #[error("{what}: length {got} does not match expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("bit count {bits} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitCount { bits: usize, bits_per_symbol: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("sample rate {sample_rate} Hz does not support {what}")]
    SampleRate { sample_rate: f64, what: String },
    #[error("empty input to {0}")]
    EmptyInput(&'static str),
    #[error("pipeline stage {stage} cannot follow {previous}")]
    StageOrder {
        stage: &'static str,
        previous: &'static str,
    },
    #[error("no overlapping symbols between received and transmitted streams")]
    NoOverlap,
}

impl SimError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
