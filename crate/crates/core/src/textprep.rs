//! Corpus parsing: sentence splitting, tokenization, vocabulary building,
//! and the SMART collection file format.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A raw input document before any analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

/// Term counts of one sentence, keyed by vocabulary index. All counts >= 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub counts: BTreeMap<usize, u32>,
}

/// Term <-> dense index bijection with per-term document frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    df: Vec<u32>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>, df: Vec<u32>) -> Self {
        assert_eq!(terms.len(), df.len());
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { terms, index, df }
    }

    /// Rebuilds the term->index map after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn df(&self, idx: usize) -> u32 {
        self.df[idx]
    }
}

/// One analyzed document: id plus its nonempty sentences in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Whole-document term-count map (the VSM column, at count level).
    pub fn term_counts(&self) -> BTreeMap<usize, u32> {
        let mut out = BTreeMap::new();
        for s in &self.sentences {
            for (&t, &c) in &s.counts {
                *out.entry(t).or_insert(0) += c;
            }
        }
        out
    }
}

/// Analyzed collection. Document order is stable and defines tdm column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub vocabulary: Vocabulary,
    pub documents: Vec<Document>,
}

/// Preprocessing parameters. The defaults are explicit because the reference
/// preprocessing for the MEDLINE numbers is not published.
#[derive(Debug, Clone)]
pub struct PrepConfig {
    pub min_term_length: usize,
    pub stopwords: Option<HashSet<String>>,
    pub lowercase: bool,
    pub min_global_df: u32,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            min_term_length: 2,
            stopwords: None,
            lowercase: true,
            min_global_df: 1,
        }
    }
}

/// Splits text into period-delimited sentences. Blank segments are dropped;
/// trailing text after the last period forms a final sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.split('.')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Maximal alphanumeric runs, optionally lowercased, filtered by length and
/// stopword list.
pub fn tokenize(sentence: &str, cfg: &PrepConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in sentence.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            if cfg.lowercase {
                cur.extend(ch.to_lowercase());
            } else {
                cur.push(ch);
            }
        } else if !cur.is_empty() {
            let tok = std::mem::take(&mut cur);
            if tok.chars().count() >= cfg.min_term_length
                && !cfg.stopwords.as_ref().is_some_and(|s| s.contains(&tok))
            {
                tokens.push(tok);
            }
        }
    }
    tokens
}

/// Builds an analyzed corpus. The vocabulary contains exactly the terms with
/// global document frequency >= `min_global_df`; documents whose sentences all
/// become empty are retained with zero sentences.
pub fn build_corpus(docs: &[RawDocument], cfg: &PrepConfig) -> Result<Corpus> {
    let mut seen = HashSet::new();
    for d in docs {
        if d.id.is_empty() {
            return Err(Error::InvalidArgument("empty document id".into()));
        }
        if !seen.insert(d.id.as_str()) {
            return Err(Error::DuplicateDocId(d.id.clone()));
        }
    }

    // tokenized sentences per document
    let tokenized: Vec<Vec<Vec<String>>> = docs
        .par_iter()
        .map(|d| {
            split_sentences(&d.text)
                .iter()
                .map(|s| tokenize(s, cfg))
                .filter(|t| !t.is_empty())
                .collect()
        })
        .collect();

    // global document frequency
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for sentences in &tokenized {
        let mut doc_terms: HashSet<&str> = HashSet::new();
        for s in sentences {
            for t in s {
                doc_terms.insert(t);
            }
        }
        for t in doc_terms {
            *df.entry(t).or_insert(0) += 1;
        }
    }

    let mut terms = Vec::new();
    let mut dfs = Vec::new();
    for (t, c) in &df {
        if *c >= cfg.min_global_df {
            terms.push((*t).to_owned());
            dfs.push(*c);
        }
    }
    let vocabulary = Vocabulary::from_terms(terms, dfs);

    let documents = docs
        .iter()
        .zip(&tokenized)
        .map(|(d, sentences)| {
            let sentences = sentences
                .iter()
                .filter_map(|toks| {
                    let mut counts = BTreeMap::new();
                    for t in toks {
                        if let Some(i) = vocabulary.index_of(t) {
                            *counts.entry(i).or_insert(0) += 1;
                        }
                    }
                    (!counts.is_empty()).then_some(Sentence { counts })
                })
                .collect();
            Document {
                id: d.id.clone(),
                sentences,
            }
        })
        .collect();

    Ok(Corpus {
        vocabulary,
        documents,
    })
}

/// Parses a SMART-format collection (".I <id>" blocks; ".T"/".A"/".W" fields
/// concatenated into the text; other dot-markers skipped).
pub fn parse_smart(bytes: &[u8]) -> Result<Vec<RawDocument>> {
    let text = String::from_utf8_lossy(bytes);
    let mut docs: Vec<RawDocument> = Vec::new();
    let mut cur: Option<(String, String)> = None;
    let mut collecting = false;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if let Some(rest) = line.strip_prefix(".I") {
            if let Some((id, text)) = cur.take() {
                docs.push(RawDocument { id, text });
            }
            let id = rest.trim();
            if id.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "missing id after .I".into(),
                });
            }
            cur = Some((id.to_owned(), String::new()));
            collecting = false;
        } else if line.starts_with(".T") || line.starts_with(".A") || line.starts_with(".W") {
            if cur.is_none() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("field marker {:?} before any .I", line.trim()),
                });
            }
            collecting = true;
        } else if line.starts_with('.') && line.len() >= 2 && !line.starts_with("..") {
            // some other SMART field (.B, .N, .X, ...): skip its content
            collecting = false;
        } else if collecting {
            if let Some((_, text)) = cur.as_mut() {
                if !text.is_empty() {
                    text.push('\n');
                }
                text.push_str(line);
            }
        } else if cur.is_none() && !line.trim().is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "content before any .I marker".into(),
            });
        }
    }
    if let Some((id, text)) = cur.take() {
        docs.push(RawDocument { id, text });
    }
    Ok(docs)
}

/// Renders documents back into the SMART format consumed by `parse_smart`.
pub fn write_smart(docs: &[RawDocument]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(".I ");
        out.push_str(&d.id);
        out.push_str("\n.W\n");
        out.push_str(&d.text);
        out.push('\n');
    }
    out
}

/// Reads a stopword file: one term per line, '#' starts a comment.
pub fn read_stopwords(bytes: &[u8]) -> HashSet<String> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_owned())
        .filter(|l| !l.is_empty())
        .collect()
}
