use std::process::ExitCode;

use thiserror::Error;

/// Why a run stopped, mapped one-to-one onto exit codes.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Failure {
    /// Tags a core error with the operation that raised it.
    pub fn from_core(operation: &str, err: phonon_bec::Error) -> Self {
        let msg = format!("{operation}: {err}");
        if err.is_divergence() || matches!(err, phonon_bec::Error::Bracket { .. }) {
            Failure::Divergence(msg)
        } else {
            Failure::Validation(msg)
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Divergence(_) => 3,
            Failure::Verification(_) => 4,
        })
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
