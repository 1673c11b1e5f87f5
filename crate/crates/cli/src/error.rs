use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected before anything was run or written.
    #[error("{0}")]
    Config(String),
    /// The run started and failed.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}
