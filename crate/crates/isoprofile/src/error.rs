use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] isoprofile_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for numerical failures, 2 for anything the caller supplied wrongly.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(isoprofile_core::Error::NoConvergence { .. }) => 1,
            _ => 2,
        }
    }

    /// Errors worth following with the usage line.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            CliError::Input(_)
                | CliError::Core(isoprofile_core::Error::Domain { .. } | isoprofile_core::Error::Input(_))
        )
    }
}
