use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("malformed number: {0}")]
    Malformed(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error(transparent)]
    Core(#[from] fibmap_core::Error),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Malformed(_) => "malformed",
            CliError::Io(_) => "io",
            CliError::Replay(_) => "replay",
            CliError::Core(e) => e.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Malformed(_) => 2,
            _ => 1,
        }
    }
}
