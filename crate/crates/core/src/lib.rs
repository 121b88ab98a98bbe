//! Matrix-space-model text retrieval.
//!
//! Represents each document as a term-by-sentence matrix, replaces the
//! document vector with the row sum of a truncated-SVD approximation of that
//! matrix (the "pseudo-tdm"), and evaluates the resulting retrieval method
//! against plain VSM and LSI baselines.

pub mod datasets;
pub mod error;
pub mod eval;
pub mod index_io;
pub mod linalg;
pub mod msm;
pub mod retrieval;
pub mod textprep;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector, SparseMatrix, SvdResult};
pub use msm::{KPrime, Tdm, TdmKind, Tsm, WeightingHooks};
pub use retrieval::{LsiIndex, Query, QueryProjection, RankedList};
pub use textprep::{Corpus, Document, PrepConfig, RawDocument, Sentence, Vocabulary};
