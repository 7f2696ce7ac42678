use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent input data.
    Data,
    /// A numerical precondition failed (non-ergodic matrix, divergence, ...).
    Numeric,
}

#[derive(Debug, Error)]
pub enum LampError {
    #[error("invalid state id {id} (state count {n})")]
    InvalidState { id: usize, n: usize },

    #[error("row {row} has empty support")]
    EmptyRow { row: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid history distribution: {0}")]
    InvalidWeights(String),

    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty history")]
    EmptyHistory,

    #[error("zero-probability transition in sequence {sequence} at position {position}")]
    ZeroProbability { sequence: usize, position: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix is not ergodic ({0})")]
    NotErgodic(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("bound is vacuous: confidence {confidence} <= 0 for T = {threshold}")]
    VacuousBound { confidence: f64, threshold: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LampError {
    pub fn class(&self) -> ErrorClass {
        match self {
            LampError::ZeroProbability { .. }
            | LampError::NonFinite(_)
            | LampError::NotErgodic(_)
            | LampError::NotConverged { .. }
            | LampError::GuardExceeded(_)
            | LampError::VacuousBound { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T, E = LampError> = std::result::Result<T, E>;
