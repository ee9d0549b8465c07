use ansatz_forge::bench::BenchError;
use ansatz_forge::circuit::CircuitError;
use ansatz_forge::llm::ProposerError;
use ansatz_forge::pauli::PauliError;
use ansatz_forge::problems::ProblemError;
use ansatz_forge::search::{ParseError, SearchError};
use ansatz_forge::vqe::TrainError;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Proposer(#[from] ProposerError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("run {0} not found")]
    RunNotFound(String),
}

impl AppError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        AppError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Io { .. } => "io",
            AppError::Input(_) => "input",
            AppError::Problem(_) => "problem",
            AppError::Pauli(_) => "hamiltonian",
            AppError::Circuit(_) => "circuit",
            AppError::Train(_) => "train",
            AppError::Search(_) => "search",
            AppError::Parse(_) => "genome",
            AppError::Proposer(_) => "proposer",
            AppError::Bench(_) => "bench",
            AppError::RunNotFound(_) => "not_found",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`
    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
