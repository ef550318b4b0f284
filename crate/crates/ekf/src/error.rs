use std::path::PathBuf;

use ekf_core::alignment::AlignError;
use ekf_core::embedding::EmbeddingError;
use ekf_core::eval::EvalError;
use ekf_core::kg::KgError;
use ekf_core::ntriples::NtError;
use ekf_core::ontology::OntologyError;
use ekf_core::quote::QuoteError;
use ekf_core::resolver::ResolveError;
use ekf_core::stats::StatsError;
use ekf_core::vecfile::VecFileError;
use ekf_core::wiki::WikiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EkfError {
    /// Invalid configuration or command line; maps to exit status 1.
    #[error("config: {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {reason}", path.display())]
    Record { path: PathBuf, line: usize, reason: String },
    #[error("{}: {reason}", path.display())]
    Input { path: PathBuf, reason: String },
    #[error("missing stage output {} (run `{stage}` first)", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error(transparent)]
    Wiki(#[from] WikiError),
    #[error(transparent)]
    Quote(#[from] QuoteError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    NTriples(#[from] NtError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    VecFile(#[from] VecFileError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl EkfError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        Self::Config { field: field.to_string(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 1 for validation errors, 2 for runtime errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = EkfError> = std::result::Result<T, E>;
