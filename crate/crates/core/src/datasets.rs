//! Synthetic multi-topic corpora: joining base documents into MED_i-style
//! collections and remapping relevance judgments.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::textprep::RawDocument;

/// How base documents are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinMode {
    /// n output docs; doc j joins base docs j..j+i-1 cyclically.
    Window,
    /// n*i output docs: one window pass per stride s in 1..=i, where doc j of
    /// pass s joins base docs j, j+s, ..., j+(i-1)s cyclically. Stride 1
    /// reproduces the window output; the union matches the reference document
    /// counts (n*i docs for i topics).
    Rotations,
}

impl JoinMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "window" => Ok(JoinMode::Window),
            "rotations" => Ok(JoinMode::Rotations),
            other => Err(Error::InvalidArgument(format!("unknown join mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JoinSpec {
    /// base documents per joined document (>= 1)
    pub docs_per_join: usize,
    pub mode: JoinMode,
    pub seed: u64,
}

impl JoinSpec {
    pub fn new(docs_per_join: usize, mode: JoinMode) -> Self {
        JoinSpec {
            docs_per_join,
            mode,
            seed: 0,
        }
    }
}

/// Which base documents each joined document was assembled from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstituentMap {
    pub entries: Vec<(String, Vec<String>)>,
}

impl ConstituentMap {
    pub fn sources(&self, joined_id: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(id, _)| id == joined_id)
            .map(|(_, s)| s.as_slice())
    }

    /// CSV "joined_id,source_id", one row per constituent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("joined_id,source_id\n");
        for (joined, sources) in &self.entries {
            for s in sources {
                out.push_str(&format!("{joined},{s}\n"));
            }
        }
        out
    }

    pub fn parse_csv(bytes: &[u8]) -> Result<ConstituentMap> {
        let text = String::from_utf8_lossy(bytes);
        let mut map: Vec<(String, Vec<String>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.starts_with("joined_id") {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (joined, source) = line.split_once(',').ok_or(Error::Parse {
                line: lineno + 1,
                msg: "expected 'joined_id,source_id'".into(),
            })?;
            match map.last_mut() {
                Some((id, sources)) if id == joined => sources.push(source.to_owned()),
                _ => map.push((joined.to_owned(), vec![source.to_owned()])),
            }
        }
        Ok(ConstituentMap { entries: map })
    }
}

fn join_texts(base: &[RawDocument], indices: impl Iterator<Item = usize>) -> (String, Vec<String>) {
    let mut sources = Vec::new();
    let mut texts = Vec::new();
    for idx in indices {
        let d = &base[idx];
        sources.push(d.id.clone());
        texts.push(d.text.as_str());
    }
    // ". " separator keeps constituent sentence boundaries intact
    (texts.join(". "), sources)
}

/// Joins base documents into multi-topic documents. With `docs_per_join` = 1
/// the output is identical to the base (any mode).
pub fn synthesize_multitopic(
    base: &[RawDocument],
    spec: &JoinSpec,
) -> Result<(Vec<RawDocument>, ConstituentMap)> {
    if base.is_empty() {
        return Err(Error::InvalidArgument("empty base corpus".into()));
    }
    if spec.docs_per_join < 1 {
        return Err(Error::InvalidArgument("docs_per_join must be >= 1".into()));
    }
    let n = base.len();
    let i = spec.docs_per_join;
    if i == 1 {
        let map = ConstituentMap {
            entries: base.iter().map(|d| (d.id.clone(), vec![d.id.clone()])).collect(),
        };
        return Ok((base.to_vec(), map));
    }

    let mut docs = Vec::new();
    let mut entries = Vec::new();
    let strides: Vec<usize> = match spec.mode {
        JoinMode::Window => vec![1],
        JoinMode::Rotations => (1..=i).collect(),
    };
    for &s in &strides {
        for j in 0..n {
            let (text, sources) = join_texts(base, (0..i).map(|t| (j + t * s) % n));
            let id = match spec.mode {
                JoinMode::Window => format!("m{}", j + 1),
                JoinMode::Rotations => format!("s{}_{}", s, j + 1),
            };
            entries.push((id.clone(), sources));
            docs.push(RawDocument { id, text });
        }
    }
    Ok((docs, ConstituentMap { entries }))
}

/// A joined document is relevant to a query iff any constituent is.
pub fn remap_qrels(qrels: &Qrels, map: &ConstituentMap) -> Qrels {
    let mut out = Qrels::default();
    for (query_id, rel) in &qrels.relevant {
        let mut joined_rel = std::collections::BTreeSet::new();
        for (joined_id, sources) in &map.entries {
            if sources.iter().any(|s| rel.contains(s)) {
                joined_rel.insert(joined_id.clone());
            }
        }
        if !joined_rel.is_empty() {
            out.relevant.insert(query_id.clone(), joined_rel);
        }
    }
    out
}

/// Multiplicity of each base document across the joined corpus.
pub fn source_multiplicity(map: &ConstituentMap) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (_, sources) in &map.entries {
        for s in sources {
            *out.entry(s.clone()).or_insert(0) += 1;
        }
    }
    out
}
