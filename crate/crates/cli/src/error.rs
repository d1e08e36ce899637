use std::io;
use std::path::PathBuf;

use countfit_core::EstimateError;
use thiserror::Error;

/// Process exit codes. Usage errors (2) are produced by clap itself.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const OUTPUT: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const ESTIMATOR: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    ReadInput { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: no positive frequencies", path.display())]
    EmptyInput { path: PathBuf },
    #[error("{family}: {source}")]
    Estimate {
        family: String,
        source: EstimateError,
    },
    #[error("cannot write {}: {source}", path.display())]
    WriteOutput { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Stdout(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ReadInput { .. } | CliError::Parse { .. } | CliError::EmptyInput { .. } => {
                exit::INPUT
            }
            CliError::Estimate { .. } => exit::ESTIMATOR,
            CliError::WriteOutput { .. } | CliError::Stdout(_) => exit::OUTPUT,
        }
    }
}
