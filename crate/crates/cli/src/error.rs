use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sumset_core::Error),

    #[error("budget exceeded: {what} needs {requested} work units, budget is {budget}")]
    Budget {
        what: String,
        requested: u128,
        budget: u128,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 1 for domain and IO failures, 3 for budget or
    /// resource limits. Usage errors (2) are raised by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget { .. } | CliError::Core(sumset_core::Error::ResourceLimit { .. }) => 3,
            _ => 1,
        }
    }
}
