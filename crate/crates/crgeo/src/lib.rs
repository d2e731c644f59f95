//! File formats, verification suites and command implementations behind the
//! `crgeo` binary.

pub mod commands;
pub mod format;
pub mod suites;

use std::path::PathBuf;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The computation ran but a property or constraint failed.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] crgeo_core::Error),
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Core(e) => match e {
                crgeo_core::Error::InvalidDomain(_) | crgeo_core::Error::EmptyGrid => 2,
                _ => 1,
            },
            CliError::Parse { .. } | CliError::Config(_) | CliError::Io { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
