use std::io;
use std::path::Path;

use efmrf_core::{CopulaError, FitError, SynthError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or infeasible input; exit code 2.
    #[error("{0}")]
    Input(String),
    /// The numerical pipeline failed; exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidConfig(_) | FitError::Copula(CopulaError::ConstantColumn(_)) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(format!("fit failed: {e}")),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CopulaError> for CliError {
    fn from(e: CopulaError) -> Self {
        CliError::Input(e.to_string())
    }
}
