//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("SVD did not converge within {max_iter} iterations (worst residual {worst_residual:.3e})")]
    NoConvergence {
        max_iter: usize,
        /// Residual ||A v_i - sigma_i u_i||_2 achieved for each requested triplet.
        residuals: Vec<f64>,
        worst_residual: f64,
    },
    #[error("vocabulary mismatch: index has {expected} terms, query was built over {got}")]
    VocabMismatch { expected: usize, got: usize },
    #[error("query sets differ across runs: {0}")]
    QuerySetMismatch(String),
    #[error("index format error: {0}")]
    IndexFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
