use thiserror::Error;

/// Errors raised by state construction, schedules and the circuit oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state field `{field}`: {reason}")]
    InvalidState { field: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidMatrix(String),

    #[error("degenerate round: coinciding-outcome probability {p:e} below {threshold:e}")]
    DegenerateRound { p: f64, threshold: f64 },

    #[error("custom schedule needs at least one (theta, phi) pair")]
    EmptySchedule,

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("fidelity {0} outside the open interval (0, 1)")]
    FidelityOutOfRange(f64),

    #[error("invalid angle {name} = {value}")]
    InvalidAngle { name: &'static str, value: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
