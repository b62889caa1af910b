use std::io;

use thiserror::Error;

use crate::engine::IterationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A weighted region set failed validation. `index` names the offending
    /// region or weight when one can be singled out.
    #[error("validation failed{}: {message}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Validation {
        index: Option<usize>,
        message: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(
        "eigen-solver did not converge after {iterations} iterations (worst residual {worst:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    /// The signal carries no out-of-band energy, so an in/out ratio is undefined.
    #[error("signal is exactly bandlimited; out-of-band energy ratio undefined")]
    ExactlyBandlimited,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Iteration produced a non-finite value or blew past the NMSE ceiling.
    /// The report holds everything recorded up to the last finite iterate.
    #[error("iteration diverged at step {}", .0.iterations)]
    Diverged(Box<IterationReport>),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
