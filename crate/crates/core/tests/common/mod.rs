//! Shared test oracles and random-instance generators. Everything here is
//! deliberately independent of the library's computation paths: the
//! eigensolver is a two-sided Jacobi on the Gram matrix (the library SVD is
//! one-sided Jacobi on the input), and the metric oracles walk every cutoff
//! by brute force.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use msm_core::linalg::{DenseMatrix, SparseMatrix};
use msm_core::retrieval::RankedList;
use msm_core::textprep::{Corpus, Document, Sentence, Vocabulary};
use rand::Rng;

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi, sorted
/// nonincreasing.
pub fn jacobi_eigenvalues(sym: &DenseMatrix) -> Vec<f64> {
    let n = sym.nrows();
    assert_eq!(n, sym.ncols());
    let mut a = sym.clone();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        let scale = a.max_abs().max(1e-300);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // A <- J^T A J on rows/cols p, q
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..n {
                    let api = a.get(p, i);
                    let aqi = a.get(q, i);
                    a.set(p, i, c * api - s * aqi);
                    a.set(q, i, s * api + c * aqi);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Singular values via the Gram-matrix eigenvalue oracle.
pub fn gram_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let gram = m.transpose().matmul(m);
    jacobi_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

/// Brute-force average precision: walks every cutoff and recomputes
/// precision from scratch.
pub fn brute_force_ap(run: &RankedList, rel: &BTreeSet<String>) -> Option<f64> {
    if rel.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for cut in 1..=run.entries.len() {
        let last = &run.entries[cut - 1].0;
        if rel.contains(last) {
            let hits = run.entries[..cut]
                .iter()
                .filter(|(d, _)| rel.contains(d))
                .count();
            total += hits as f64 / cut as f64;
        }
    }
    Some(total / rel.len() as f64)
}

/// Brute-force 11-point interpolated precision: for each recall level,
/// enumerates every cutoff and takes the max precision among those whose
/// recall reaches the level.
pub fn brute_force_ip11(run: &RankedList, rel: &BTreeSet<String>) -> Option<[f64; 11]> {
    if rel.is_empty() {
        return None;
    }
    let r = rel.len() as f64;
    let mut out = [0.0f64; 11];
    for (li, level) in out.iter_mut().enumerate() {
        let x = li as f64 / 10.0;
        let mut best = 0.0f64;
        for cut in 1..=run.entries.len() {
            let hits = run.entries[..cut]
                .iter()
                .filter(|(d, _)| rel.contains(d))
                .count() as f64;
            if hits / r >= x - 1e-12 {
                best = best.max(hits / cut as f64);
            }
        }
        *level = best;
    }
    Some(out)
}

/// Random dense matrix with entries in [-1, 1].
pub fn random_dense(rng: &mut impl Rng, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random sparse matrix with the given fill density.
pub fn random_sparse(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut cols = Vec::with_capacity(n);
    for _ in 0..n {
        let mut col = Vec::new();
        for r in 0..m {
            if rng.gen_bool(density) {
                col.push((r, rng.gen_range(-2.0..2.0)));
            }
        }
        cols.push(col);
    }
    SparseMatrix::from_columns(m, cols)
}

/// Random synthetic corpus built directly from count structures.
pub fn random_corpus(
    rng: &mut impl Rng,
    ndocs: usize,
    max_sentences: usize,
    vocab_size: usize,
) -> Corpus {
    random_corpus_sized(rng, ndocs, 1, max_sentences, vocab_size)
}

/// As `random_corpus`, with an explicit sentences-per-document range.
pub fn random_corpus_sized(
    rng: &mut impl Rng,
    ndocs: usize,
    min_sentences: usize,
    max_sentences: usize,
    vocab_size: usize,
) -> Corpus {
    let terms: Vec<String> = (0..vocab_size).map(|i| format!("t{i:04}")).collect();
    let mut documents = Vec::with_capacity(ndocs);
    let mut df = vec![0u32; vocab_size];
    for d in 0..ndocs {
        let nsent = rng.gen_range(min_sentences.max(1)..=max_sentences.max(1));
        let mut sentences = Vec::with_capacity(nsent);
        let mut doc_terms: BTreeSet<usize> = BTreeSet::new();
        for _ in 0..nsent {
            let nterms = rng.gen_range(1..=8usize);
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for _ in 0..nterms {
                let t = rng.gen_range(0..vocab_size);
                *counts.entry(t).or_insert(0) += 1;
                doc_terms.insert(t);
            }
            sentences.push(Sentence { counts });
        }
        for t in doc_terms {
            df[t] += 1;
        }
        documents.push(Document {
            id: format!("d{}", d + 1),
            sentences,
        });
    }
    Corpus {
        vocabulary: Vocabulary::from_terms(terms, df),
        documents,
    }
}

/// Random ranked list over `ndocs` documents, all docs ranked.
pub fn random_run(rng: &mut impl Rng, query_id: &str, ndocs: usize) -> RankedList {
    let mut ids: Vec<usize> = (0..ndocs).collect();
    // Fisher-Yates
    for i in (1..ndocs).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    RankedList {
        query_id: query_id.to_owned(),
        entries: ids
            .into_iter()
            .enumerate()
            .map(|(rank, d)| (format!("d{d}"), 1.0 - rank as f64 / ndocs as f64))
            .collect(),
    }
}

/// Random relevant-document subset (possibly empty).
pub fn random_rel(rng: &mut impl Rng, ndocs: usize, p: f64) -> BTreeSet<String> {
    (0..ndocs)
        .filter(|_| rng.gen_bool(p))
        .map(|d| format!("d{d}"))
        .collect()
}
