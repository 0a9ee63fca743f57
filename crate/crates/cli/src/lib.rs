//! Pipeline stages behind the `readmit` command.
//!
//! Each stage reads the artifacts named in a [`config::PipelineConfig`],
//! writes its own, and returns a [`stages::Summary`] with the sha256 of every
//! file it read or wrote.

pub mod config;
pub mod stages;

use std::process::ExitCode;

pub use config::PipelineConfig;
pub use stages::{ArtifactError, Summary};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ARTIFACT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

/// Marks errors in the command line or config file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit code for a failed stage.
pub fn exit_code(err: &anyhow::Error) -> ExitCode {
    use readmit_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return ExitCode::from(EXIT_USAGE);
        }
        if cause.is::<ArtifactError>() {
            return ExitCode::from(EXIT_ARTIFACT);
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return ExitCode::from(match e {
                E::NonFinite(_) => EXIT_NUMERIC,
                E::Io(_) | E::Format { .. } => EXIT_ARTIFACT,
                _ => 1,
            });
        }
    }
    ExitCode::FAILURE
}
