//! Term-by-sentence matrices and the pseudo term-document matrix: each
//! document column is the row sum of a truncated-SVD approximation of the
//! document's own term-by-sentence matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    best_k_times, svd_dense, DenseMatrix, DenseVector, SparseMatrix, DEFAULT_RANK_TOL,
};
use crate::textprep::{Corpus, Document};

/// Relative drop tolerance for entries stored into a pseudo-tdm column.
pub const COLUMN_DROP_TOL: f64 = 1e-12;

/// Truncation level for document approximation. `Full` is the sentinel that
/// keeps every singular triplet, reverting the pseudo-tdm to the plain tdm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KPrime {
    Full,
    Fixed(usize),
}

impl KPrime {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") || s == "inf" {
            return Ok(KPrime::Full);
        }
        let k: usize = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad k': {s:?}")))?;
        if k < 1 {
            return Err(Error::InvalidArgument("k' must be >= 1".into()));
        }
        Ok(KPrime::Fixed(k))
    }
}

impl std::fmt::Display for KPrime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KPrime::Full => write!(f, "full"),
            KPrime::Fixed(k) => write!(f, "{k}"),
        }
    }
}

/// Optional weighting: `global` is a per-term positive diagonal (G), `local`
/// per-document per-sentence positive weights (p). Defaults realize G = I,
/// p = e.
#[derive(Debug, Clone, Default)]
pub struct WeightingHooks {
    pub global: Option<Vec<f64>>,
    pub local: Option<Vec<Vec<f64>>>,
}

impl WeightingHooks {
    fn global_weight(&self, term: usize) -> f64 {
        self.global.as_ref().map_or(1.0, |g| g[term])
    }

    fn sentence_weights(&self, doc_idx: usize, nsent: usize) -> DenseVector {
        match &self.local {
            Some(p) => {
                assert_eq!(p[doc_idx].len(), nsent, "local weight length mismatch");
                p[doc_idx].clone()
            }
            None => vec![1.0; nsent],
        }
    }
}

/// Term-by-sentence matrix of one document, rows indexed by the collection
/// vocabulary (the zero-row embedding is implicit in the global indexing).
#[derive(Debug, Clone)]
pub struct Tsm {
    pub doc_id: String,
    pub matrix: SparseMatrix,
}

/// Kind of term-by-document matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TdmKind {
    Vsm,
    Pseudo(KPrime),
}

/// Term-by-document matrix with cached column norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tdm {
    pub matrix: SparseMatrix,
    pub doc_ids: Vec<String>,
    pub kind: TdmKind,
    pub column_norms: Vec<f64>,
}

impl Tdm {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ndocs(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Builds the term-by-sentence matrix of a document over `vocab_len` rows.
pub fn build_tsm(doc: &Document, vocab_len: usize) -> Tsm {
    let cols = doc
        .sentences
        .iter()
        .map(|s| {
            s.counts
                .iter()
                .map(|(&t, &c)| (t, c as f64))
                .collect::<Vec<_>>()
        })
        .collect();
    Tsm {
        doc_id: doc.id.clone(),
        matrix: SparseMatrix::from_columns(vocab_len, cols),
    }
}

fn weighted_row_sum(tsm: &Tsm, p: &[f64], g: impl Fn(usize) -> f64) -> DenseVector {
    let mut out = vec![0.0; tsm.matrix.nrows()];
    for j in 0..tsm.matrix.ncols() {
        let w = p[j];
        for (r, v) in tsm.matrix.col(j) {
            out[r] += v * w;
        }
    }
    for (r, x) in out.iter_mut().enumerate() {
        *x *= g(r);
    }
    out
}

/// Approximated document vector: G * best_{k_eff}(S) * p with k_eff clamped
/// to the numerical rank of the tsm. When k_eff reaches the rank (or the
/// `Full` sentinel is given) the exact row sum S * p is returned and no SVD
/// is computed.
pub fn approx_doc_vector(
    tsm: &Tsm,
    kprime: KPrime,
    hooks: &WeightingHooks,
    doc_idx: usize,
    rank_tol: f64,
) -> Result<DenseVector> {
    let t = tsm.matrix.ncols();
    if t == 0 {
        return Ok(vec![0.0; tsm.matrix.nrows()]);
    }
    let p = hooks.sentence_weights(doc_idx, t);

    let kp = match kprime {
        KPrime::Full => return Ok(weighted_row_sum(tsm, &p, |r| hooks.global_weight(r))),
        KPrime::Fixed(k) => {
            if k < 1 {
                return Err(Error::InvalidArgument("k' must be >= 1".into()));
            }
            k
        }
    };

    // tsm's are tiny, so a dense SVD on the compacted row support is cheap
    let support = tsm.matrix.row_support();
    if support.is_empty() {
        return Ok(vec![0.0; tsm.matrix.nrows()]);
    }
    let mut row_of = vec![usize::MAX; tsm.matrix.nrows()];
    for (local, &global) in support.iter().enumerate() {
        row_of[global] = local;
    }
    let mut local = DenseMatrix::zeros(support.len(), t);
    for j in 0..t {
        for (r, v) in tsm.matrix.col(j) {
            local.set(row_of[r], j, v);
        }
    }

    let svd = svd_dense(&local)?;
    let rank = svd.numerical_rank(rank_tol);
    if kp >= rank {
        // reversion: best_rank(S) reconstructs S
        return Ok(weighted_row_sum(tsm, &p, |r| hooks.global_weight(r)));
    }
    let compact = best_k_times(&svd, kp, &p)?;
    let mut out = vec![0.0; tsm.matrix.nrows()];
    for (local_r, &global_r) in support.iter().enumerate() {
        out[global_r] = compact[local_r] * hooks.global_weight(global_r);
    }
    Ok(out)
}

fn assemble_tdm(corpus: &Corpus, kind: TdmKind, columns: Vec<DenseVector>) -> Tdm {
    let m = corpus.vocabulary.len();
    let sparse_cols = columns
        .into_iter()
        .map(|col| {
            let norm = crate::linalg::dense::norm2(&col);
            let drop = COLUMN_DROP_TOL * norm;
            col.into_iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > drop)
                .collect()
        })
        .collect();
    let matrix = SparseMatrix::from_columns(m, sparse_cols);
    let column_norms = (0..matrix.ncols()).map(|j| matrix.col_norm(j)).collect();
    Tdm {
        matrix,
        doc_ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        kind,
        column_norms,
    }
}

/// Builds the pseudo-tdm: per-document tsm, truncated SVD, weighted row sum,
/// assembled in document order.
pub fn build_pseudo_tdm(
    corpus: &Corpus,
    kprime: KPrime,
    hooks: &WeightingHooks,
    rank_tol: f64,
) -> Result<Tdm> {
    let m = corpus.vocabulary.len();
    let columns: Vec<DenseVector> = corpus
        .documents
        .par_iter()
        .enumerate()
        .map(|(j, doc)| {
            let tsm = build_tsm(doc, m);
            approx_doc_vector(&tsm, kprime, hooks, j, rank_tol)
        })
        .collect::<Result<_>>()?;
    Ok(assemble_tdm(corpus, TdmKind::Pseudo(kprime), columns))
}

/// Builds the plain VSM term-frequency tdm (with optional weighting hooks).
pub fn build_vsm_tdm(corpus: &Corpus, hooks: &WeightingHooks) -> Tdm {
    let m = corpus.vocabulary.len();
    let columns: Vec<DenseVector> = corpus
        .documents
        .iter()
        .enumerate()
        .map(|(j, doc)| {
            let tsm = build_tsm(doc, m);
            let p = hooks.sentence_weights(j, tsm.matrix.ncols());
            weighted_row_sum(&tsm, &p, |r| hooks.global_weight(r))
        })
        .collect();
    assemble_tdm(corpus, TdmKind::Vsm, columns)
}

/// Convenience: pseudo-tdm with default hooks and rank tolerance.
pub fn build_pseudo_tdm_default(corpus: &Corpus, kprime: KPrime) -> Result<Tdm> {
    build_pseudo_tdm(corpus, kprime, &WeightingHooks::default(), DEFAULT_RANK_TOL)
}
