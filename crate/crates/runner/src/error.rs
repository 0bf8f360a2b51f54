use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("unknown scenario {0:?} (see `fraclab list`)")]
    UnknownScenario(String),

    #[error("config: {0}")]
    Config(String),

    #[error("rerun of {dir} does not reproduce the stored record: {detail}")]
    NonReproducible { dir: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] fractal_lab::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RunnerError {
    pub fn code(&self) -> &'static str {
        match self {
            RunnerError::UnknownScenario(_) => "unknown_scenario",
            RunnerError::Config(_) => "config",
            RunnerError::NonReproducible { .. } => "non_reproducible",
            RunnerError::Core(e) => e.code(),
            RunnerError::Io(_) => "io",
            RunnerError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, RunnerError>;
