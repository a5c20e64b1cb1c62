use thiserror::Error;
use transseries::ErrorClass;

/// Everything the command line can fail with.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{stage}: {source}")]
    Solver {
        stage: &'static str,
        #[source]
        source: transseries::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Condition(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<transseries::Error> for CliError {
    fn from(source: transseries::Error) -> Self {
        CliError::Solver { stage: "input", source }
    }
}

impl CliError {
    /// Attach the pipeline stage to a solver error.
    pub fn at(stage: &'static str) -> impl Fn(transseries::Error) -> CliError {
        move |source| CliError::Solver { stage, source }
    }

    /// 2 for bad input or failed conditions, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Condition(_) => 2,
            CliError::Solver { source, .. } => match source.class() {
                ErrorClass::Precondition => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::VerifyFailed(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
