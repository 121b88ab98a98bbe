//! Retrieval evaluation: average precision, 11-point interpolated precision,
//! per-query win counts, spectrum and timing reports.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{sigma_csv, svds_sparse};
use crate::msm::{build_pseudo_tdm_default, build_vsm_tdm, KPrime, Tdm, WeightingHooks};
use crate::retrieval::{
    build_lsi_index, score_cosine, score_lsi, Query, QueryProjection, RankedList,
};
use crate::textprep::Corpus;

/// Relevance judgments: query id -> set of relevant doc ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    pub relevant: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    pub fn get(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.relevant.get(query_id)
    }

    /// Parses whitespace-separated "query_id doc_id [grade]" lines; a missing
    /// grade means relevant, a grade of 0 means not relevant.
    pub fn parse(bytes: &[u8]) -> Result<Qrels> {
        let text = String::from_utf8_lossy(bytes);
        let mut relevant: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() < 2 || parts.len() > 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected 'query_id doc_id [grade]', got {line:?}"),
                });
            }
            let is_relevant = match parts.get(2) {
                None => true,
                Some(g) => g.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad grade {g:?}"),
                })? > 0.0,
            };
            if is_relevant {
                relevant
                    .entry(parts[0].to_owned())
                    .or_default()
                    .insert(parts[1].to_owned());
            }
        }
        Ok(Qrels { relevant })
    }

    /// Doc ids referenced by the judgments but absent from the corpus.
    pub fn unknown_docs(&self, doc_ids: &[String]) -> Vec<String> {
        let known: BTreeSet<&str> = doc_ids.iter().map(String::as_str).collect();
        let mut out = Vec::new();
        for docs in self.relevant.values() {
            for d in docs {
                if !known.contains(d.as_str()) {
                    out.push(d.clone());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Non-interpolated average precision: mean over relevant docs of the
/// precision at each relevant doc's rank; relevant-but-unranked contribute 0.
/// Returns None when the relevant set is empty (query skipped).
pub fn average_precision(run: &RankedList, rel: &BTreeSet<String>) -> Option<f64> {
    if rel.is_empty() {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank0, (doc_id, _)) in run.entries.iter().enumerate() {
        if rel.contains(doc_id) {
            hits += 1;
            sum += hits as f64 / (rank0 + 1) as f64;
        }
    }
    Some(sum / rel.len() as f64)
}

/// 11-point interpolated precision at recall levels 0.0, 0.1, ..., 1.0 and
/// its average. Each value is the maximum precision over cutoffs achieving at
/// least that recall.
pub fn interpolated_11pt(run: &RankedList, rel: &BTreeSet<String>) -> Option<([f64; 11], f64)> {
    if rel.is_empty() {
        return None;
    }
    let r = rel.len() as f64;
    // precision/recall after each cutoff containing a relevant doc
    let mut points: Vec<(f64, f64)> = Vec::new(); // (recall, precision)
    let mut hits = 0usize;
    for (rank0, (doc_id, _)) in run.entries.iter().enumerate() {
        if rel.contains(doc_id) {
            hits += 1;
            points.push((hits as f64 / r, hits as f64 / (rank0 + 1) as f64));
        }
    }
    let mut levels = [0.0; 11];
    for (i, level) in levels.iter_mut().enumerate() {
        let x = i as f64 / 10.0;
        *level = points
            .iter()
            .filter(|(rec, _)| *rec >= x - 1e-12)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
    }
    let avg = levels.iter().sum::<f64>() / 11.0;
    Some((levels, avg))
}

/// Per-method win counts: a method wins a query iff its average precision
/// strictly exceeds every other method's; ties award no one.
pub fn win_counts(
    method_runs: &[(String, Vec<RankedList>)],
    qrels: &Qrels,
) -> Result<Vec<(String, usize, f64)>> {
    let query_sets: Vec<BTreeSet<&str>> = method_runs
        .iter()
        .map(|(_, runs)| runs.iter().map(|r| r.query_id.as_str()).collect())
        .collect();
    for (i, qs) in query_sets.iter().enumerate().skip(1) {
        if qs != &query_sets[0] {
            return Err(Error::QuerySetMismatch(format!(
                "method {:?} evaluated on a different query set than {:?}",
                method_runs[i].0, method_runs[0].0
            )));
        }
    }
    let nmethods = method_runs.len();
    let mut wins = vec![0usize; nmethods];
    let mut evaluated = 0usize;
    for query_id in &query_sets[0] {
        let Some(rel) = qrels.get(query_id) else {
            continue;
        };
        if rel.is_empty() {
            continue;
        }
        let aps: Vec<f64> = method_runs
            .iter()
            .map(|(_, runs)| {
                let run = runs.iter().find(|r| r.query_id == *query_id).unwrap();
                average_precision(run, rel).unwrap_or(0.0)
            })
            .collect();
        evaluated += 1;
        for i in 0..nmethods {
            if (0..nmethods).all(|j| j == i || aps[i] > aps[j]) {
                wins[i] += 1;
            }
        }
    }
    Ok(method_runs
        .iter()
        .zip(wins)
        .map(|((name, _), w)| {
            let pct = if evaluated == 0 {
                0.0
            } else {
                100.0 * w as f64 / evaluated as f64
            };
            (name.clone(), w, pct)
        })
        .collect())
}

/// CSV of the top-n singular values of a tdm ("index,sigma" rows).
pub fn spectrum_report(tdm: &Tdm, n: usize) -> Result<String> {
    let qmin = tdm.nrows().min(tdm.ndocs());
    let k = n.min(qmin).max(1);
    let svd = svds_sparse(&tdm.matrix, k, 1e-8, qmin)?;
    Ok(sigma_csv(&svd.sigma))
}

/// Retrieval method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Vsm,
    Msm { kprime: KPrime },
    Lsi { k: usize },
    MsmLsi { kprime: KPrime, k: usize },
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Vsm => write!(f, "vsm"),
            Method::Msm { kprime } => write!(f, "msm(k'={kprime})"),
            Method::Lsi { k } => write!(f, "lsi(k={k})"),
            Method::MsmLsi { kprime, k } => write!(f, "msm+lsi(k'={kprime},k={k})"),
        }
    }
}

/// Builds the method's index from the corpus and scores every query.
pub fn run_method(corpus: &Corpus, method: Method, queries: &[Query]) -> Result<Vec<RankedList>> {
    match method {
        Method::Vsm => {
            let tdm = build_vsm_tdm(corpus, &WeightingHooks::default());
            queries.iter().map(|q| score_cosine(&tdm, q)).collect()
        }
        Method::Msm { kprime } => {
            let tdm = build_pseudo_tdm_default(corpus, kprime)?;
            queries.iter().map(|q| score_cosine(&tdm, q)).collect()
        }
        Method::Lsi { k } => {
            let tdm = build_vsm_tdm(corpus, &WeightingHooks::default());
            let lsi = build_lsi_index(&tdm, k)?;
            queries
                .iter()
                .map(|q| score_lsi(&lsi, q, QueryProjection::Plain))
                .collect()
        }
        Method::MsmLsi { kprime, k } => {
            let tdm = build_pseudo_tdm_default(corpus, kprime)?;
            let lsi = build_lsi_index(&tdm, k)?;
            queries
                .iter()
                .map(|q| score_lsi(&lsi, q, QueryProjection::Plain))
                .collect()
        }
    }
}

/// Wall-clock seconds per method: index build (including any SVDs) plus all
/// query scoring, end to end.
pub fn timing_report(
    corpus: &Corpus,
    methods: &[Method],
    queries: &[Query],
) -> Result<Vec<(String, f64)>> {
    methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            run_method(corpus, m, queries)?;
            Ok((m.to_string(), start.elapsed().as_secs_f64()))
        })
        .collect()
}

pub fn timing_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("method,seconds\n");
    for (m, s) in rows {
        out.push_str(&format!("{m},{s:.6}\n"));
    }
    out
}

/// Aggregated evaluation over a set of methods and queries.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub methods: Vec<String>,
    /// mean non-interpolated average precision per method
    pub mean_ap: Vec<f64>,
    /// mean 11-point interpolated average precision per method
    pub mean_ip11: Vec<f64>,
    /// mean interpolated curve per method (11 recall levels)
    pub curves: Vec<[f64; 11]>,
    /// per query id, per method AP
    pub per_query_ap: BTreeMap<String, Vec<f64>>,
    pub wins: Vec<(String, usize, f64)>,
    /// queries skipped for lack of relevant documents
    pub skipped_queries: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

pub fn evaluate(method_runs: &[(String, Vec<RankedList>)], qrels: &Qrels) -> Result<EvalReport> {
    let wins = win_counts(method_runs, qrels)?;
    let methods: Vec<String> = method_runs.iter().map(|(n, _)| n.clone()).collect();
    let nmethods = methods.len();

    let mut per_query_ap: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut skipped: BTreeSet<String> = BTreeSet::new();
    let mut ap_sums = vec![0.0; nmethods];
    let mut ip_sums = vec![0.0; nmethods];
    let mut curve_sums = vec![[0.0; 11]; nmethods];
    let mut counted = 0usize;

    let query_ids: Vec<String> = method_runs[0]
        .1
        .iter()
        .map(|r| r.query_id.clone())
        .collect();
    for qid in &query_ids {
        let rel = qrels.get(qid).filter(|r| !r.is_empty());
        let Some(rel) = rel else {
            skipped.insert(qid.clone());
            continue;
        };
        counted += 1;
        let mut aps = Vec::with_capacity(nmethods);
        for (mi, (_, runs)) in method_runs.iter().enumerate() {
            let run = runs.iter().find(|r| &r.query_id == qid).unwrap();
            let ap = average_precision(run, rel).unwrap();
            let (curve, ip) = interpolated_11pt(run, rel).unwrap();
            aps.push(ap);
            ap_sums[mi] += ap;
            ip_sums[mi] += ip;
            for (c, v) in curve_sums[mi].iter_mut().zip(curve) {
                *c += v;
            }
        }
        per_query_ap.insert(qid.clone(), aps);
    }
    let denom = counted.max(1) as f64;
    Ok(EvalReport {
        methods,
        mean_ap: ap_sums.iter().map(|s| s / denom).collect(),
        mean_ip11: ip_sums.iter().map(|s| s / denom).collect(),
        curves: curve_sums
            .iter()
            .map(|c| {
                let mut out = [0.0; 11];
                for (o, v) in out.iter_mut().zip(c) {
                    *o = v / denom;
                }
                out
            })
            .collect(),
        per_query_ap,
        wins,
        skipped_queries: skipped.into_iter().collect(),
        metadata: BTreeMap::new(),
    })
}

impl EvalReport {
    /// CSV blocks: mean precision table, interpolated curves, win counts,
    /// per-query APs.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# mean precision\nmethod,mean_ap,mean_ip11\n");
        for (i, m) in self.methods.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", m, self.mean_ap[i], self.mean_ip11[i]));
        }
        out.push_str("\n# interpolated precision curves\nmethod");
        for i in 0..11 {
            out.push_str(&format!(",r{:.1}", i as f64 / 10.0));
        }
        out.push('\n');
        for (i, m) in self.methods.iter().enumerate() {
            out.push_str(m);
            for v in self.curves[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("\n# win counts\nmethod,wins,percent\n");
        for (m, w, p) in &self.wins {
            out.push_str(&format!("{m},{w},{p:.1}\n"));
        }
        out.push_str("\n# per-query average precision\nquery_id");
        for m in &self.methods {
            out.push_str(&format!(",{m}"));
        }
        out.push('\n');
        for (qid, aps) in &self.per_query_ap {
            out.push_str(qid);
            for a in aps {
                out.push_str(&format!(",{a}"));
            }
            out.push('\n');
        }
        if !self.skipped_queries.is_empty() {
            out.push_str("\n# skipped queries (no relevant documents)\n");
            for q in &self.skipped_queries {
                out.push_str(q);
                out.push('\n');
            }
        }
        out
    }

    /// Machine-readable summary.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert("methods".into(), serde_json::json!(self.methods));
        map.insert("mean_ap".into(), serde_json::json!(self.mean_ap));
        map.insert("mean_ip11".into(), serde_json::json!(self.mean_ip11));
        map.insert(
            "wins".into(),
            serde_json::json!(self
                .wins
                .iter()
                .map(|(m, w, p)| serde_json::json!({"method": m, "wins": w, "percent": p}))
                .collect::<Vec<_>>()),
        );
        map.insert(
            "skipped_queries".into(),
            serde_json::json!(self.skipped_queries),
        );
        map.insert("metadata".into(), serde_json::json!(self.metadata));
        serde_json::Value::Object(map).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(qid: &str, docs: &[&str]) -> RankedList {
        RankedList {
            query_id: qid.into(),
            entries: docs
                .iter()
                .enumerate()
                .map(|(i, d)| ((*d).to_owned(), 1.0 - i as f64 * 0.1))
                .collect(),
        }
    }

    fn rel(docs: &[&str]) -> BTreeSet<String> {
        docs.iter().map(|d| (*d).to_owned()).collect()
    }

    #[test]
    fn ap_perfect_ranking() {
        let r = run("q", &["d1", "d2", "d3"]);
        assert_eq!(average_precision(&r, &rel(&["d1", "d2"])), Some(1.0));
    }

    #[test]
    fn ap_single_relevant_at_rank_k() {
        let r = run("q", &["d1", "d2", "d3", "d4"]);
        assert_eq!(average_precision(&r, &rel(&["d3"])), Some(1.0 / 3.0));
    }

    #[test]
    fn ap_mixed() {
        let r = run("q", &["d1", "d2", "d3"]);
        let ap = average_precision(&r, &rel(&["d1", "d3"])).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ap_empty_rel_skipped() {
        let r = run("q", &["d1"]);
        assert_eq!(average_precision(&r, &BTreeSet::new()), None);
    }

    #[test]
    fn ip_perfect_single_relevant() {
        let r = run("q", &["d1", "d2"]);
        let (levels, avg) = interpolated_11pt(&r, &rel(&["d1"])).unwrap();
        assert!(levels.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ip_relevant_last() {
        let r = run("q", &["d1", "d2", "d3"]);
        let (levels, _) = interpolated_11pt(&r, &rel(&["d3"])).unwrap();
        for v in levels {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ip_step_shape() {
        let r = run("q", &["d1", "d2", "d3"]);
        let (levels, _) = interpolated_11pt(&r, &rel(&["d1", "d3"])).unwrap();
        for (i, v) in levels.iter().enumerate() {
            let want = if i as f64 / 10.0 <= 0.5 + 1e-12 {
                1.0
            } else {
                2.0 / 3.0
            };
            assert!((v - want).abs() < 1e-12, "level {i}: {v}");
        }
    }

    #[test]
    fn ip_curve_nonincreasing() {
        let r = run("q", &["d4", "d1", "d5", "d2", "d3"]);
        let (levels, _) = interpolated_11pt(&r, &rel(&["d1", "d2", "d3"])).unwrap();
        for w in levels.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn win_counts_all_ties_zero() {
        let runs = vec![
            ("a".to_owned(), vec![run("q1", &["d1", "d2"])]),
            ("b".to_owned(), vec![run("q1", &["d1", "d2"])]),
        ];
        let mut qrels = Qrels::default();
        qrels.relevant.insert("q1".into(), rel(&["d1"]));
        let w = win_counts(&runs, &qrels).unwrap();
        assert!(w.iter().all(|(_, c, _)| *c == 0));
    }

    #[test]
    fn win_counts_dominating_method() {
        let runs = vec![
            ("good".to_owned(), vec![run("q1", &["d1", "d2"]), run("q2", &["d2", "d1"])]),
            ("bad".to_owned(), vec![run("q1", &["d2", "d1"]), run("q2", &["d1", "d2"])]),
        ];
        let mut qrels = Qrels::default();
        qrels.relevant.insert("q1".into(), rel(&["d1"]));
        qrels.relevant.insert("q2".into(), rel(&["d2"]));
        let w = win_counts(&runs, &qrels).unwrap();
        assert_eq!(w[0], ("good".into(), 2, 100.0));
        assert_eq!(w[1].1, 0);
    }

    #[test]
    fn win_counts_rejects_mismatched_query_sets() {
        let runs = vec![
            ("a".to_owned(), vec![run("q1", &["d1"])]),
            ("b".to_owned(), vec![run("q2", &["d1"])]),
        ];
        assert!(matches!(
            win_counts(&runs, &Qrels::default()),
            Err(Error::QuerySetMismatch(_))
        ));
    }

    #[test]
    fn qrels_parse_formats() {
        let q = Qrels::parse(b"1 d1\n1 d2 1\n1 d3 0\n# comment\n2 d1\n").unwrap();
        assert_eq!(q.get("1").unwrap().len(), 2);
        assert!(q.get("1").unwrap().contains("d2"));
        assert!(!q.get("1").unwrap().contains("d3"));
        assert!(q.get("2").unwrap().contains("d1"));
    }

    #[test]
    fn qrels_unknown_docs_reported() {
        let q = Qrels::parse(b"1 d1\n1 ghost\n").unwrap();
        let unknown = q.unknown_docs(&["d1".to_owned()]);
        assert_eq!(unknown, vec!["ghost".to_owned()]);
    }

    #[test]
    fn spectrum_report_diag() {
        use crate::linalg::SparseMatrix;
        use crate::msm::TdmKind;
        let matrix = SparseMatrix::from_columns(
            3,
            vec![vec![(0, 3.0)], vec![(1, 2.0)], vec![(2, 1.0)]],
        );
        let tdm = Tdm {
            matrix,
            doc_ids: vec!["a".into(), "b".into(), "c".into()],
            kind: TdmKind::Vsm,
            column_norms: vec![3.0, 2.0, 1.0],
        };
        let csv = spectrum_report(&tdm, 2).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,sigma");
        assert!(lines[1].starts_with("1,3") || lines[1].starts_with("1,2.999"));
        assert!(lines[2].starts_with("2,2") || lines[2].starts_with("2,1.999"));
    }

    #[test]
    fn timing_empty_queries() {
        use crate::textprep::{build_corpus, PrepConfig, RawDocument};
        let docs = vec![RawDocument {
            id: "1".into(),
            text: "alpha beta.".into(),
        }];
        let corpus = build_corpus(&docs, &PrepConfig::default()).unwrap();
        let rows = timing_report(&corpus, &[Method::Vsm], &[]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].1 >= 0.0);
        let csv = timing_csv(&rows);
        assert!(csv.starts_with("method,seconds\n"));
    }
}
