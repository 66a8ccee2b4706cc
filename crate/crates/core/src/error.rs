use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate crossing: detuning and coupling are both zero")]
    Degenerate,

    #[error("time {t:e} s lies outside the schedule window [0, {duration:e}] s")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("dimension mismatch: model is {model}-level, state is {state}-level")]
    DimensionMismatch { model: usize, state: usize },

    #[error("adiabatic elimination requires Delta >= 100 max(Omega_p, Omega_S); Delta = {delta:e}, max coupling = {coupling:e} rad/s")]
    EliminationRegime { delta: f64, coupling: f64 },

    #[error("integration failed at step {step} (t = {t:e} s): {reason}")]
    IntegrationFailure { step: usize, t: f64, reason: String },

    #[error("{protocol} at axis value {axis_value:e}: {source}")]
    SweepPoint {
        protocol: String,
        axis_value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of the numerical integration itself, as opposed to bad input.
    pub fn is_integration_failure(&self) -> bool {
        match self {
            Error::IntegrationFailure { .. } => true,
            Error::SweepPoint { source, .. } => source.is_integration_failure(),
            _ => false,
        }
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
