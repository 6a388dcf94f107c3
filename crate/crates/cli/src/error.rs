use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mpmc::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("invalid JSON in {context}: {source}")]
    Json { context: String, source: serde_json::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Process exit status: 2 user error, 3 resource budget, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget() => 3,
            CliError::Core(e) if e.is_numerical() => 4,
            _ => 2,
        }
    }
}

pub(crate) fn io_err(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> CliError {
    move |source| CliError::Io { context: context.to_string(), source }
}

pub(crate) fn json_err(context: impl std::fmt::Display) -> impl FnOnce(serde_json::Error) -> CliError {
    move |source| CliError::Json { context: context.to_string(), source }
}
