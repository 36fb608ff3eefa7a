use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used
/// for the computation so that the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals")]
    QuadratureNonConvergence { value: f64, error: f64, intervals: usize },

    #[error("relaxation rate is singular at t = {t}: |G(t)| = {g:e}")]
    SingularRate { t: f64, g: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(&'static str),

    #[error("exp(Gamma) overflows at t = {t} (Gamma = {gamma})")]
    Horizon { t: f64, gamma: f64 },

    #[error("integration step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integrator exceeded {steps} steps before t = {t}")]
    TooManySteps { t: f64, steps: usize },

    #[error("non-finite derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn ensure_non_negative<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            reason: "must be finite and non-negative",
        })
    }
}
