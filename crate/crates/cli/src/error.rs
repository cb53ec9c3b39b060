use thiserror::Error;

/// Failures surfaced by the command line, each mapped to one exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<qdarwin::Error> for CliError {
    fn from(e: qdarwin::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
