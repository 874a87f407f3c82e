use lowpass_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for bad input, 3 for an exhausted work budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::BudgetExceeded { .. }) => 3,
            CliError::Input(_) | CliError::Json(_) | CliError::Core(_) => 2,
            CliError::Io(_) | CliError::Csv(_) | CliError::Pool(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Input(msg.into()))
}
