use std::process::ExitCode;

use thiserror::Error;

use crate::scenario::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),

    #[error("parse error at line {line}, column {column}: {message}", line = .0.line, column = .0.column, message = .0.message)]
    Parse(ParseError),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("integration failed at step {step}: {message}")]
    Integration { step: usize, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Integration { .. } => 4,
        })
    }
}

impl From<lrmech::Error> for CliError {
    fn from(e: lrmech::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<lrmech::integrators::IntegrationFailure> for CliError {
    fn from(f: lrmech::integrators::IntegrationFailure) -> Self {
        CliError::Integration { step: f.step, message: f.source.to_string() }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
