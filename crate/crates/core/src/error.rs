use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("run is empty")]
    EmptyRun,

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("runs do not share a model")]
    ModelMismatch,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing run files: {}", .0.join(", "))]
    MissingRuns(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short stable tag used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::EmptyRun => "empty_run",
            Error::InvalidRun(_) => "invalid_run",
            Error::ModelMismatch => "model_mismatch",
            Error::Degenerate(_) => "degenerate",
            Error::Config(_) => "config",
            Error::MissingRuns(_) => "missing_runs",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
