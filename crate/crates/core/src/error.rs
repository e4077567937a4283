use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The diamagnetic frequency is zero, so the mixing parameter is undefined.
    #[error("decoupled system: omega_d must be > 0 (mixing parameter undefined)")]
    DecoupledSystem,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid initial conditions: {0}")]
    InvalidInitialConditions(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size too large: {steps_per_period:.2} steps per upper-polariton period (need >= {min})")]
    StepSizeTooLarge { steps_per_period: f64, min: f64 },

    #[error("numerical divergence: non-finite state at t = {time}")]
    NumericalDivergence { time: f64 },

    #[error("derived quantity `{0}` is not finite")]
    NonFinite(&'static str),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix of order {order} exceeds the dense eigensolver guard ({limit})")]
    TooLargeForDense { order: usize, limit: usize },

    #[error("insufficient span: found {found} envelope minima, need at least 2")]
    InsufficientSpan { found: usize },

    #[error("trajectory is missing momenta: {0}")]
    MissingMomenta(String),

    #[error("molecule index {index} out of range (n = {n})")]
    InvalidIndex { index: usize, n: usize },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalDivergence { .. }
                | Error::NonFinite(_)
                | Error::NoConvergence { .. }
                | Error::InsufficientSpan { .. }
        )
    }
}
