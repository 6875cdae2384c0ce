use mmimo_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    ValidationFailed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("plot: {0}")]
    Plot(String),
    #[error("{0}")]
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Infeasible { .. } | CoreError::NoFeasiblePoint { .. } => CliError::Infeasible(e.to_string()),
            CoreError::InvalidConfig(_) | CoreError::InvalidReuseFactor(_) => CliError::Usage(e.to_string()),
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    /// 0 ok, 1 usage or runtime error, 2 infeasible configuration,
    /// 3 validation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::ValidationFailed(_) => 3,
            _ => 1,
        }
    }
}
