use thiserror::Error;

use crate::simulation::StepRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid geometry: wheel radius {radius} m, wheel separation {separation} m")]
    InvalidGeometry { radius: f64, separation: f64 },

    #[error("degenerate navigation state: rho = {rho}")]
    DegenerateState { rho: f64 },

    #[error("degenerate measurement: rho_m = {rho_m}")]
    DegenerateMeasurement { rho_m: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The closed loop produced a non-finite state. `trajectory` holds every
    /// record logged before the failure.
    #[error("episode aborted at step {step}: {reason}")]
    Aborted {
        step: usize,
        reason: String,
        trajectory: Box<Vec<StepRecord>>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed trajectory record: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
