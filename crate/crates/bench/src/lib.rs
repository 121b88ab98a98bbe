//! Shared input generation for the benchmarks: a deterministic synthetic
//! corpus with per-topic vocabularies, shaped like short abstracts.

use msm_core::textprep::{build_corpus, Corpus, PrepConfig, RawDocument};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic multi-topic document set. Each document draws most tokens
/// from one topic's skewed vocabulary and the rest from a shared pool.
pub fn synthetic_docs(ndocs: usize, ntopics: usize, seed: u64) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skewed = |rng: &mut ChaCha8Rng, len: usize| {
        let x: f64 = rng.gen();
        ((x * x) * len as f64) as usize
    };
    (0..ndocs)
        .map(|j| {
            let topic = j % ntopics;
            let nsent = rng.gen_range(4..=8);
            let sentences: Vec<String> = (0..nsent)
                .map(|_| {
                    let nwords = rng.gen_range(5..=9);
                    (0..nwords)
                        .map(|_| {
                            if rng.gen_bool(0.7) {
                                format!("t{topic}w{}", skewed(&mut rng, 30))
                            } else {
                                format!("cw{}", skewed(&mut rng, 40))
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            RawDocument {
                id: format!("d{}", j + 1),
                text: format!("{}.", sentences.join(". ")),
            }
        })
        .collect()
}

/// Synthetic corpus, already tokenized and indexed.
pub fn synthetic_corpus(ndocs: usize, ntopics: usize, seed: u64) -> Corpus {
    build_corpus(&synthetic_docs(ndocs, ntopics, seed), &PrepConfig::default()).unwrap()
}
