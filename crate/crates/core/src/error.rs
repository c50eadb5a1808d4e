use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidInput {
        field: &'static str,
        reason: &'static str,
    },

    #[error("index {index} out of range for a bath of {n} oscillators")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("oscillator {index} is resonant with the central system (omega = {omega:e}, Omega = {omega_big:e})")]
    Resonance {
        index: usize,
        omega: f64,
        omega_big: f64,
    },

    #[error("squeezed initial states are only supported in the full model")]
    UnsupportedSqueezing,

    #[error("large-separation ratio {ratio:e} of oscillator {index} is below the threshold {threshold}")]
    LargeSeparation {
        index: usize,
        ratio: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) const fn invalid(field: &'static str, reason: &'static str) -> Self {
        Error::InvalidInput { field, reason }
    }

    /// True for errors raised by a numerical guard rather than malformed input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::Resonance { .. } | Error::LargeSeparation { .. })
    }
}
