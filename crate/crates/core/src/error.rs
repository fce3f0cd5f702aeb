//! Error types shared across the crate.

use thiserror::Error;

use crate::model::ModelKind;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state vector was used with a model kind it does not belong to.
    #[error("state shape mismatch: state is {state:?}, operation expects {expected:?}")]
    ShapeMismatch {
        expected: ModelKind,
        state: ModelKind,
    },

    /// A scalar argument fell outside its mathematical domain.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// Parameter or configuration validation failed.
    #[error("validation error at `{field}`: {detail}")]
    Validation { field: String, detail: String },

    /// The requested surface design is unstable or ill-posed.
    #[error("stability error: {0}")]
    Stability(String),

    /// The integrator produced a non-finite value or lost conservation.
    #[error("numerical error at t={time}: {detail}")]
    Numerical { time: f64, detail: String },

    /// Input data could not be parsed.
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    /// Measured-signal scaling left the unit interval.
    #[error("scaling error: {0}")]
    Scaling(String),

    /// A series was too short for the requested smoothing window.
    #[error("sizing error: {0}")]
    Sizing(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub fn validation(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad inputs rather than runtime failures.
    /// The CLI maps these to exit code 1 and everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ShapeMismatch { .. }
                | Error::Domain { .. }
                | Error::Validation { .. }
                | Error::Stability(_)
                | Error::Parse { .. }
                | Error::Scaling(_)
                | Error::Sizing(_)
        )
    }
}
