use thiserror::Error;

/// Errors raised by the numeric kernel, the controller and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its documented invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Argument outside the mathematical domain of a function.
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    /// A structural precondition of a bound (e.g. `p + q = 2`) does not hold.
    #[error("precondition of {bound} not met: {reason}")]
    Precondition { bound: &'static str, reason: String },

    /// The tracking error left the open prescribed envelope.
    #[error("envelope violation at t = {t:.6} s: e1 = {e1:.9e} not inside ({k_l:.9e}, {k_u:.9e})")]
    EnvelopeViolation { t: f64, e1: f64, k_l: f64, k_u: f64 },

    #[error("non-finite {what} at t = {t:.6} s")]
    NonFinite { what: &'static str, t: f64 },

    /// Something the control law relies on (e.g. `eta1 > 0`) failed.
    #[error("internal invariant failed: {0}")]
    Invariant(String),

    #[error("quadrature on [{a}, {b}] did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("oracle horizon of {horizon} s exceeded with V = {v:e}")]
    HorizonExceeded { horizon: f64, v: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Stamp a time onto errors that carry one.
    pub fn at_time(self, time: f64) -> Self {
        match self {
            Error::EnvelopeViolation { e1, k_l, k_u, .. } => {
                Error::EnvelopeViolation { t: time, e1, k_l, k_u }
            }
            Error::NonFinite { what, .. } => Error::NonFinite { what, t: time },
            other => other,
        }
    }

    pub fn is_envelope_violation(&self) -> bool {
        matches!(self, Error::EnvelopeViolation { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
