//! Error classification for exit codes: validation problems (bad config,
//! missing or unparsable inputs, bad flags) exit with 2, failures inside a
//! running stage exit with 3.

use std::fmt;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_STAGE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Validation(anyhow::Error),
    Stage {
        stage: &'static str,
        source: anyhow::Error,
    },
}

impl CliError {
    pub fn validation(source: anyhow::Error) -> Self {
        CliError::Validation(source)
    }

    pub fn stage(stage: &'static str, source: anyhow::Error) -> Self {
        CliError::Stage { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Stage { .. } => EXIT_STAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(e) => write!(f, "validation error: {e:#}"),
            CliError::Stage { stage, source } => {
                write!(f, "stage '{stage}' failed: {source:#}")
            }
        }
    }
}

impl std::error::Error for CliError {}
