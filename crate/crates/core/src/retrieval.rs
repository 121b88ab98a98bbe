//! Query vectorization and cosine ranking against a tdm or an LSI projection.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{cosine, svds_sparse, DenseMatrix, DenseVector};
use crate::msm::Tdm;
use crate::textprep::{split_sentences, tokenize, PrepConfig, Vocabulary};

/// Sparse query vector over a corpus vocabulary. Out-of-vocabulary terms are
/// dropped; `dropped_terms` records how many.
#[derive(Debug, Clone)]
pub struct Query {
    pub id: String,
    pub terms: Vec<(usize, f64)>,
    pub vocab_len: usize,
    pub dropped_terms: usize,
}

impl Query {
    /// Raw term-frequency query over the given vocabulary.
    pub fn from_text(id: &str, text: &str, vocab: &Vocabulary, cfg: &PrepConfig) -> Query {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        let mut dropped = 0usize;
        for sentence in split_sentences(text) {
            for tok in tokenize(&sentence, cfg) {
                match vocab.index_of(&tok) {
                    Some(i) => *counts.entry(i).or_insert(0.0) += 1.0,
                    None => dropped += 1,
                }
            }
        }
        Query {
            id: id.to_owned(),
            terms: counts.into_iter().collect(),
            vocab_len: vocab.len(),
            dropped_terms: dropped,
        }
    }

    pub fn from_vector(id: &str, terms: Vec<(usize, f64)>, vocab_len: usize) -> Query {
        Query {
            id: id.to_owned(),
            terms,
            vocab_len,
            dropped_terms: 0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    fn to_dense(&self) -> DenseVector {
        let mut v = vec![0.0; self.vocab_len];
        for &(i, x) in &self.terms {
            v[i] = x;
        }
        v
    }
}

/// Scored ranking: all doc_ids sorted by score descending, ties broken by
/// document index ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<(String, f64)>,
}

fn ranked(query_id: &str, doc_ids: &[String], scores: Vec<f64>) -> RankedList {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    RankedList {
        query_id: query_id.to_owned(),
        entries: order
            .into_iter()
            .map(|i| (doc_ids[i].clone(), scores[i]))
            .collect(),
    }
}

/// Cosine scoring against the tdm columns using the cached norms.
pub fn score_cosine(tdm: &Tdm, q: &Query) -> Result<RankedList> {
    if q.vocab_len != tdm.nrows() {
        return Err(Error::VocabMismatch {
            expected: tdm.nrows(),
            got: q.vocab_len,
        });
    }
    let qdense = q.to_dense();
    let qnorm = q.norm();
    let scores: Vec<f64> = (0..tdm.ndocs())
        .map(|j| {
            let cnorm = tdm.column_norms[j];
            if cnorm == 0.0 || qnorm == 0.0 {
                return 0.0;
            }
            let dot: f64 = tdm.matrix.col(j).map(|(r, v)| v * qdense[r]).sum();
            dot / (cnorm * qnorm)
        })
        .collect();
    Ok(ranked(&q.id, &tdm.doc_ids, scores))
}

/// How queries are projected into the LSI space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryProjection {
    /// q_hat = U_k^T q (consistent with comparing against Sigma_k V_k^T).
    #[default]
    Plain,
    /// q_hat = Sigma_k^{-1} U_k^T q.
    SigmaInverse,
}

/// LSI projection of a tdm: k leading left singular vectors plus the
/// projected document columns Sigma_k V_k^T.
#[derive(Debug, Clone)]
pub struct LsiIndex {
    pub k: usize,
    pub u_k: DenseMatrix,
    pub sigma_k: DenseVector,
    pub projected_docs: DenseMatrix,
    pub doc_ids: Vec<String>,
}

pub fn build_lsi_index(tdm: &Tdm, k: usize) -> Result<LsiIndex> {
    let qmin = tdm.nrows().min(tdm.ndocs());
    if k < 1 || k > qmin {
        return Err(Error::InvalidArgument(format!(
            "LSI k = {k} out of range 1..={qmin}"
        )));
    }
    let svd = svds_sparse(&tdm.matrix, k, 1e-8, qmin)?;
    let n = tdm.ndocs();
    let projected = DenseMatrix::from_fn(k, n, |i, j| svd.sigma[i] * svd.v.get(j, i));
    Ok(LsiIndex {
        k,
        u_k: svd.u,
        sigma_k: svd.sigma,
        projected_docs: projected,
        doc_ids: tdm.doc_ids.clone(),
    })
}

pub fn score_lsi(index: &LsiIndex, q: &Query, projection: QueryProjection) -> Result<RankedList> {
    if q.vocab_len != index.u_k.nrows() {
        return Err(Error::VocabMismatch {
            expected: index.u_k.nrows(),
            got: q.vocab_len,
        });
    }
    // q_hat = U_k^T q over the sparse query support
    let mut qhat = vec![0.0; index.k];
    for &(r, x) in &q.terms {
        for (i, qh) in qhat.iter_mut().enumerate() {
            *qh += index.u_k.get(r, i) * x;
        }
    }
    if projection == QueryProjection::SigmaInverse {
        for (qh, s) in qhat.iter_mut().zip(&index.sigma_k) {
            if *s > 0.0 {
                *qh /= s;
            }
        }
    }
    let n = index.projected_docs.ncols();
    let scores: Vec<f64> = (0..n)
        .map(|j| cosine(&qhat, &index.projected_docs.col(j)))
        .collect();
    Ok(ranked(&q.id, &index.doc_ids, scores))
}

/// TREC run format: "query_id Q0 doc_id rank score run_tag", rank from 1.
pub fn write_trec_run(runs: &[RankedList], run_tag: &str) -> String {
    let mut out = String::new();
    for run in runs {
        for (rank, (doc_id, score)) in run.entries.iter().enumerate() {
            out.push_str(&format!(
                "{} Q0 {} {} {:.6} {}\n",
                run.query_id,
                doc_id,
                rank + 1,
                score,
                run_tag
            ));
        }
    }
    out
}

/// Parses a TREC run file back into ranked lists (scores trusted, order kept).
pub fn parse_trec_run(bytes: &[u8]) -> Result<Vec<RankedList>> {
    let text = String::from_utf8_lossy(bytes);
    let mut runs: Vec<RankedList> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() < 6 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 6 TREC run fields, got {}", parts.len()),
            });
        }
        let (qid, doc_id, score) = (parts[0], parts[2], parts[4]);
        let score: f64 = score.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad score {score:?}"),
        })?;
        match runs.last_mut() {
            Some(r) if r.query_id == qid => r.entries.push((doc_id.to_owned(), score)),
            _ => runs.push(RankedList {
                query_id: qid.to_owned(),
                entries: vec![(doc_id.to_owned(), score)],
            }),
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::msm::{build_vsm_tdm, WeightingHooks};
    use crate::textprep::{build_corpus, PrepConfig, RawDocument};

    fn corpus_of(texts: &[&str]) -> crate::textprep::Corpus {
        let docs: Vec<RawDocument> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| RawDocument {
                id: format!("d{}", i + 1),
                text: (*t).to_owned(),
            })
            .collect();
        build_corpus(&docs, &PrepConfig::default()).unwrap()
    }

    #[test]
    fn pure_column_query_ranks_first_with_score_one() {
        let c = corpus_of(&["apple apple.", "banana.", "cherry plum."]);
        let tdm = build_vsm_tdm(&c, &WeightingHooks::default());
        let q = Query::from_text("q", "apple", &c.vocabulary, &PrepConfig::default());
        let r = score_cosine(&tdm, &q).unwrap();
        assert_eq!(r.entries[0].0, "d1");
        assert!((r.entries[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_query_gives_doc_order() {
        let c = corpus_of(&["apple.", "banana.", "cherry."]);
        let tdm = build_vsm_tdm(&c, &WeightingHooks::default());
        // query over vocabulary but hitting no docs is impossible here, so use
        // an explicit zero query: all scores 0, tie-break = doc order
        let q = Query::from_vector("q", vec![], c.vocabulary.len());
        let r = score_cosine(&tdm, &q).unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|(d, _)| d.as_str()).collect();
        assert_eq!(ids, vec!["d1", "d2", "d3"]);
        assert!(r.entries.iter().all(|(_, s)| *s == 0.0));
    }

    #[test]
    fn vocab_mismatch_rejected() {
        let c = corpus_of(&["apple."]);
        let tdm = build_vsm_tdm(&c, &WeightingHooks::default());
        let q = Query::from_vector("q", vec![], c.vocabulary.len() + 3);
        assert!(matches!(
            score_cosine(&tdm, &q),
            Err(Error::VocabMismatch { .. })
        ));
    }

    #[test]
    fn oov_terms_counted() {
        let c = corpus_of(&["apple banana."]);
        let q = Query::from_text("q", "apple zebra quokka", &c.vocabulary, &PrepConfig::default());
        assert_eq!(q.dropped_terms, 2);
        assert_eq!(q.terms.len(), 1);
    }

    #[test]
    fn ranking_invariant_under_query_scaling() {
        let c = corpus_of(&["apple banana.", "banana cherry.", "apple cherry plum."]);
        let tdm = build_vsm_tdm(&c, &WeightingHooks::default());
        let q1 = Query::from_text("q", "apple cherry", &c.vocabulary, &PrepConfig::default());
        let mut terms = q1.terms.clone();
        for t in &mut terms {
            t.1 *= 7.5;
        }
        let q2 = Query::from_vector("q", terms, q1.vocab_len);
        let r1 = score_cosine(&tdm, &q1).unwrap();
        let r2 = score_cosine(&tdm, &q2).unwrap();
        for (a, b) in r1.entries.iter().zip(&r2.entries) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn full_rank_lsi_matches_vsm_ranking() {
        let c = corpus_of(&[
            "apple banana. cherry.",
            "banana banana. plum.",
            "cherry plum apple.",
        ]);
        let tdm = build_vsm_tdm(&c, &WeightingHooks::default());
        let k = tdm.nrows().min(tdm.ndocs());
        let lsi = build_lsi_index(&tdm, k).unwrap();
        for text in ["apple", "banana plum", "cherry apple"] {
            let q = Query::from_text("q", text, &c.vocabulary, &PrepConfig::default());
            let rv = score_cosine(&tdm, &q).unwrap();
            let rl = score_lsi(&lsi, &q, QueryProjection::Plain).unwrap();
            let iv: Vec<&str> = rv.entries.iter().map(|(d, _)| d.as_str()).collect();
            let il: Vec<&str> = rl.entries.iter().map(|(d, _)| d.as_str()).collect();
            assert_eq!(iv, il, "query {text:?}");
            // scores agree up to the constant ||q|| / ||U_k^T q|| factor
            let ratio = rv.entries[0].1 / rl.entries[0].1;
            for (a, b) in rv.entries.iter().zip(&rl.entries) {
                assert!((a.1 - ratio * b.1).abs() < 1e-8, "query {text:?}");
            }
        }
    }

    #[test]
    fn diag_tdm_k1_projection() {
        use crate::linalg::SparseMatrix;
        use crate::msm::{Tdm, TdmKind};
        let matrix = SparseMatrix::from_columns(2, vec![vec![(0, 3.0)], vec![(1, 2.0)]]);
        let column_norms = vec![3.0, 2.0];
        let tdm = Tdm {
            matrix,
            doc_ids: vec!["a".into(), "b".into()],
            kind: TdmKind::Vsm,
            column_norms,
        };
        let lsi = build_lsi_index(&tdm, 1).unwrap();
        assert!((lsi.sigma_k[0] - 3.0).abs() < 1e-9);
        assert!((lsi.projected_docs.get(0, 0).abs() - 3.0).abs() < 1e-9);
        assert!(lsi.projected_docs.get(0, 1).abs() < 1e-9);
    }

    #[test]
    fn query_orthogonal_to_subspace_scores_zero() {
        use crate::linalg::SparseMatrix;
        use crate::msm::{Tdm, TdmKind};
        let matrix = SparseMatrix::from_columns(3, vec![vec![(0, 2.0)], vec![(0, 1.0)]]);
        let tdm = Tdm {
            matrix,
            doc_ids: vec!["a".into(), "b".into()],
            kind: TdmKind::Vsm,
            column_norms: vec![2.0, 1.0],
        };
        let lsi = build_lsi_index(&tdm, 1).unwrap();
        let q = Query::from_vector("q", vec![(2, 1.0)], 3);
        let r = score_lsi(&lsi, &q, QueryProjection::Plain).unwrap();
        assert!(r.entries.iter().all(|(_, s)| s.abs() < 1e-12));
    }

    #[test]
    fn trec_run_roundtrip() {
        let runs = vec![RankedList {
            query_id: "1".into(),
            entries: vec![("d2".into(), 0.5), ("d1".into(), 0.25)],
        }];
        let text = write_trec_run(&runs, "tag");
        assert!(text.starts_with("1 Q0 d2 1 0.500000 tag\n"));
        let parsed = parse_trec_run(text.as_bytes()).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].entries[0].0, "d2");
        assert_eq!(parsed[0].entries.len(), 2);
    }
}
