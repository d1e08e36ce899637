//! Library side of the `countfit` command-line tool: the frequency-file
//! format, the model-spec grammar, report documents and the commands that
//! produce them. `main.rs` only parses arguments and writes output.

pub mod commands;
pub mod error;
pub mod figure;
pub mod freqfile;
pub mod modelspec;
pub mod report;

pub use error::CliError;
