use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}: no records")]
    EmptyFile(PathBuf),
    #[error("degree-2 expansion is rank deficient: rank {rank} with {cols} columns")]
    RankDeficientAfterExpansion { rank: usize, cols: usize },
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] volsamp_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage problems, 3 for bad data or failed computations.
    pub fn exit_code(&self) -> i32 {
        use volsamp_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidArgument(_) | E::UnknownCheck(_) | E::BudgetTooSmall { .. },
            ) => 2,
            _ => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::io("<stream>", e)
    }
}
