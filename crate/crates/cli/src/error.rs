use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Core(#[from] paneitz_core::Error),
}

impl CliError {
    /// 0 success, 1 usage, 2 accuracy, 3 non-convergence.
    pub fn exit_code(&self) -> u8 {
        use paneitz_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Json(_) => 1,
            CliError::Clap(e) => match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            },
            CliError::Accuracy(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Grid(_) | E::NotApplicable(_) => 1,
                E::Accuracy { .. } | E::Divergent(_) | E::Fit(_) | E::Bracketing(_) => 2,
                E::Eigen(_) | E::Singular(_) => 3,
            },
        }
    }
}
