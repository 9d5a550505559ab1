use alloc::string::String;

use crate::stream::Encoding;

/// Errors raised by the simulator blocks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A real value does not fit the encoding range and must be prescaled first.
    #[error("value {value} is outside the {encoding:?} range")]
    Range { value: f64, encoding: Encoding },

    /// A block was driven with inputs that violate its interface contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Weight or network shapes do not line up.
    #[error("shape mismatch in layer {layer}: expected {expected}, found {actual}")]
    Shape {
        layer: usize,
        expected: String,
        actual: String,
    },

    /// Weight precision outside `1..=64` bits.
    #[error("precision {0} is outside 1..=64 bits")]
    Precision(u32),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
