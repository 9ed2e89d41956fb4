use thiserror::Error;

use crate::support::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cost {0} is outside [0, 1]")]
    CostOutOfRange(f64),

    #[error("no active voters at cost threshold {0}")]
    NoActiveVoters(f64),

    #[error("invalid support function: {0}")]
    InvalidSupport(String),

    #[error("invalid issue:\n{0}")]
    InvalidIssue(ValidationReport),

    #[error("invalid pivotality model: {0}")]
    InvalidPpm(String),

    #[error("expected turnout {turnout} exceeds population {population}")]
    TurnoutExceedsPopulation { turnout: f64, population: u64 },

    #[error("population {population} exceeds the exact-method cap of {cap}; use the normal or monte carlo method")]
    PopulationTooLarge { population: u64, cap: u64 },

    #[error("monte carlo needs at least {min} samples, got {got}")]
    TooFewSamples { got: u64, min: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::NonConvergence(_) => 4,
            _ => 2,
        }
    }
}
