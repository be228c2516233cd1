use thiserror::Error;

/// Errors surfaced by the numeric routines.
///
/// Variants fall into two groups: invalid input (bad parameters, values
/// outside a documented range) and guard/precision violations, where the
/// input is well formed but the computation would exceed a tractability cap
/// or could not be carried out at the promised accuracy.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponent pair ({a},{b}): {reason}")]
    InvalidParams {
        a: u32,
        b: u32,
        reason: &'static str,
    },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("guard violation: {0}")]
    Guard(String),

    #[error("precision failure: {0}")]
    Precision(String),
}

impl Error {
    /// True for guard and precision violations, false for plain input errors.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard(_) | Error::Precision(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
