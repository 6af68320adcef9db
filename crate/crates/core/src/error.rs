use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("infeasible parameters: cap={cap}, margin={margin}")]
    InfeasibleParameters { cap: f64, margin: f64 },

    #[error("generation stalled after {attempts} rejected draws")]
    GenerationStall { attempts: u64 },

    #[error("angular spread undefined: every sample is at the origin")]
    UndefinedSpread,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::ContractViolation(_) => "contract_violation",
            Error::InfeasibleParameters { .. } => "infeasible_parameters",
            Error::GenerationStall { .. } => "generation_stall",
            Error::UndefinedSpread => "undefined_spread",
            Error::EmptyInput(_) => "empty_input",
            Error::Parse { .. } => "parse",
            Error::Csv(_) => "csv",
            Error::Plot(_) => "plot",
            Error::Io(_) => "io",
        }
    }
}
