//! Batch front end: index construction, query evaluation, metric reports,
//! spectrum/low-rank diagnostics, and multi-topic corpus synthesis.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use msm_core::datasets::{synthesize_multitopic, JoinMode, JoinSpec};
use msm_core::eval::{evaluate, spectrum_report, Qrels};
use msm_core::index_io::{read_index, write_index, FORMAT_VERSION};
use msm_core::linalg::lowrank_shift_distance;
use msm_core::msm::{build_pseudo_tdm, build_vsm_tdm, KPrime, TdmKind, WeightingHooks};
use msm_core::retrieval::{
    build_lsi_index, parse_trec_run, score_cosine, score_lsi, write_trec_run, Query,
    QueryProjection,
};
use msm_core::textprep::{build_corpus, parse_smart, read_stopwords, write_smart, PrepConfig};
use msm_core::linalg::DEFAULT_RANK_TOL;

#[derive(Parser)]
#[command(name = "msm", version, about = "Matrix-space-model text retrieval")]
struct Cli {
    /// Bound worker parallelism for per-document SVDs and scoring
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PrepArgs {
    /// Minimum token length
    #[arg(long, default_value_t = 2)]
    min_term_len: usize,
    /// Stopword file: one term per line, '#' comments
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Minimum global document frequency for a term to be kept
    #[arg(long, default_value_t = 1)]
    min_df: u32,
    /// Keep original case
    #[arg(long)]
    no_lowercase: bool,
}

impl PrepArgs {
    fn to_config(&self) -> Result<PrepConfig> {
        let stopwords = match &self.stopwords {
            Some(p) => Some(read_stopwords(
                &fs::read(p).with_context(|| format!("reading stopwords {}", p.display()))?,
            )),
            None => None,
        };
        Ok(PrepConfig {
            min_term_length: self.min_term_len,
            stopwords,
            lowercase: !self.no_lowercase,
            min_global_df: self.min_df,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and persist a (pseudo-)tdm index from a SMART-format corpus
    Index {
        /// SMART-format corpus file
        #[arg(long)]
        corpus: PathBuf,
        /// Truncation level k' (a number, or "full" for the VSM-equivalent sentinel);
        /// omit to build a plain VSM index
        #[arg(long)]
        kprime: Option<String>,
        /// Relative tolerance for the per-document numerical-rank clamp
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[command(flatten)]
        prep: PrepArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Score queries against a persisted index, writing a TREC run file
    Query {
        #[arg(long)]
        index: PathBuf,
        /// SMART-format query file
        #[arg(long, conflicts_with = "text")]
        queries: Option<PathBuf>,
        /// A single ad-hoc query
        #[arg(long)]
        text: Option<String>,
        /// Apply LSI with this rank on top of the index
        #[arg(long)]
        lsi_k: Option<usize>,
        /// Project queries with Sigma^-1 scaling in LSI space
        #[arg(long)]
        lsi_sigma_inverse: bool,
        #[arg(long, default_value = "msm")]
        run_tag: String,
        #[command(flatten)]
        prep: PrepArgs,
        /// Output run file
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate TREC run files against qrels
    Eval {
        /// One or more TREC run files (method name taken from file stem)
        #[arg(long, required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        qrels: PathBuf,
        /// Output directory for report.csv and summary.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-n singular values of an index, as CSV
    Spectrum {
        #[arg(long)]
        index: PathBuf,
        #[arg(short, default_value_t = 100)]
        n: usize,
        /// Output CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative Frobenius distance to the best rank-k approximation
    Lowrank {
        #[arg(long)]
        index: PathBuf,
        #[arg(short, default_value_t = 100)]
        k: usize,
    },
    /// Join base documents into a synthetic multi-topic corpus
    Synth {
        /// SMART-format base corpus
        #[arg(long)]
        corpus: PathBuf,
        /// Base documents per joined document
        #[arg(short, long)]
        i: usize,
        /// window | rotations
        #[arg(long, default_value = "rotations")]
        mode: String,
        /// Output directory (corpus.smart + constituents.csv)
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Index {
            corpus,
            kprime,
            rank_tol,
            prep,
            out,
        } => cmd_index(&corpus, kprime.as_deref(), rank_tol, &prep, &out),
        Command::Query {
            index,
            queries,
            text,
            lsi_k,
            lsi_sigma_inverse,
            run_tag,
            prep,
            out,
        } => cmd_query(
            &index,
            queries.as_deref(),
            text.as_deref(),
            lsi_k,
            lsi_sigma_inverse,
            &run_tag,
            &prep,
            &out,
        ),
        Command::Eval { runs, qrels, out } => cmd_eval(&runs, &qrels, &out),
        Command::Spectrum { index, n, out } => cmd_spectrum(&index, n, out.as_deref()),
        Command::Lowrank { index, k } => cmd_lowrank(&index, k),
        Command::Synth {
            corpus,
            i,
            mode,
            out,
        } => cmd_synth(&corpus, i, &mode, &out),
    }
}

fn cmd_index(
    corpus_path: &Path,
    kprime: Option<&str>,
    rank_tol: f64,
    prep: &PrepArgs,
    out: &Path,
) -> Result<()> {
    let raw = parse_smart(
        &fs::read(corpus_path).with_context(|| format!("reading {}", corpus_path.display()))?,
    )?;
    if raw.is_empty() {
        bail!("corpus {} contains no documents", corpus_path.display());
    }
    let cfg = prep.to_config()?;
    let corpus = build_corpus(&raw, &cfg)?;

    let tdm = match kprime {
        None => build_vsm_tdm(&corpus, &WeightingHooks::default()),
        Some(s) => {
            let kp = KPrime::parse(s)?;
            build_pseudo_tdm(&corpus, kp, &WeightingHooks::default(), rank_tol)?
        }
    };

    fs::create_dir_all(out)?;
    let index_path = out.join("index.json");
    let mut file = fs::File::create(&index_path)?;
    write_index(&mut file, &corpus.vocabulary, &tdm)?;

    // build stats in the style of the dataset-size table
    let ndocs = corpus.documents.len();
    let total_terms: usize = corpus
        .documents
        .iter()
        .map(|d| d.term_counts().len())
        .sum();
    let total_sentences: usize = corpus.documents.iter().map(|d| d.sentences.len()).sum();
    let mut stats = BTreeMap::new();
    stats.insert("docs", ndocs.to_string());
    stats.insert("vocab", corpus.vocabulary.len().to_string());
    stats.insert(
        "avg_terms_per_doc",
        format!("{:.2}", total_terms as f64 / ndocs as f64),
    );
    stats.insert(
        "avg_sentences_per_doc",
        format!("{:.2}", total_sentences as f64 / ndocs as f64),
    );
    stats.insert(
        "kind",
        match tdm.kind {
            TdmKind::Vsm => "vsm".to_owned(),
            TdmKind::Pseudo(kp) => format!("pseudo(k'={kp})"),
        },
    );
    stats.insert("format_version", FORMAT_VERSION.to_string());
    let log: String = stats
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect();
    fs::write(out.join("build.log"), &log)?;
    print!("{log}");
    println!("wrote {}", index_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_query(
    index_path: &Path,
    queries: Option<&Path>,
    text: Option<&str>,
    lsi_k: Option<usize>,
    lsi_sigma_inverse: bool,
    run_tag: &str,
    prep: &PrepArgs,
    out: &Path,
) -> Result<()> {
    let index = read_index(&mut fs::File::open(index_path)?)?;
    let cfg = prep.to_config()?;
    let raw_queries = match (queries, text) {
        (Some(p), None) => parse_smart(&fs::read(p)?)?,
        (None, Some(t)) => vec![msm_core::RawDocument {
            id: "1".into(),
            text: t.to_owned(),
        }],
        _ => bail!("provide exactly one of --queries or --text"),
    };
    let qs: Vec<Query> = raw_queries
        .iter()
        .map(|d| Query::from_text(&d.id, &d.text, &index.vocabulary, &cfg))
        .collect();
    for q in &qs {
        if q.dropped_terms > 0 {
            eprintln!(
                "warning: query {} dropped {} out-of-vocabulary terms",
                q.id, q.dropped_terms
            );
        }
        if q.terms.is_empty() {
            eprintln!("warning: query {} has no in-vocabulary terms; all scores zero", q.id);
        }
    }

    let runs = match lsi_k {
        None => qs
            .iter()
            .map(|q| score_cosine(&index.tdm, q))
            .collect::<msm_core::Result<Vec<_>>>()?,
        Some(k) => {
            let lsi = build_lsi_index(&index.tdm, k)?;
            let proj = if lsi_sigma_inverse {
                QueryProjection::SigmaInverse
            } else {
                QueryProjection::Plain
            };
            qs.iter()
                .map(|q| score_lsi(&lsi, q, proj))
                .collect::<msm_core::Result<Vec<_>>>()?
        }
    };
    fs::write(out, write_trec_run(&runs, run_tag))?;
    println!("wrote {} ({} queries)", out.display(), runs.len());
    Ok(())
}

fn cmd_eval(runs: &[PathBuf], qrels_path: &Path, out: &Path) -> Result<()> {
    let qrels = Qrels::parse(&fs::read(qrels_path)?)?;
    let mut method_runs = Vec::new();
    for path in runs {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        method_runs.push((name, parse_trec_run(&fs::read(path)?)?));
    }
    if let Some((_, first)) = method_runs.first() {
        if let Some(run) = first.first() {
            let doc_ids: Vec<String> = run.entries.iter().map(|(d, _)| d.clone()).collect();
            let unknown = qrels.unknown_docs(&doc_ids);
            if !unknown.is_empty() {
                eprintln!(
                    "warning: {} qrels doc ids not present in the run (e.g. {:?})",
                    unknown.len(),
                    &unknown[..unknown.len().min(5)]
                );
            }
        }
    }
    let report = evaluate(&method_runs, &qrels)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("report.csv"), report.to_csv())?;
    fs::write(out.join("summary.json"), report.to_json())?;
    for (i, m) in report.methods.iter().enumerate() {
        println!(
            "{m}: mean_ap={:.4} mean_ip11={:.4}",
            report.mean_ap[i], report.mean_ip11[i]
        );
    }
    println!("wrote {}", out.join("report.csv").display());
    Ok(())
}

fn cmd_spectrum(index_path: &Path, n: usize, out: Option<&Path>) -> Result<()> {
    let index = read_index(&mut fs::File::open(index_path)?)?;
    let csv = spectrum_report(&index.tdm, n)?;
    match out {
        Some(p) => {
            fs::write(p, csv)?;
            println!("wrote {}", p.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_lowrank(index_path: &Path, k: usize) -> Result<()> {
    let index = read_index(&mut fs::File::open(index_path)?)?;
    let d = lowrank_shift_distance(&index.tdm.matrix, k)?;
    println!("{d}");
    Ok(())
}

fn cmd_synth(corpus_path: &Path, i: usize, mode: &str, out: &Path) -> Result<()> {
    let base = parse_smart(&fs::read(corpus_path)?)?;
    let mode = JoinMode::parse(mode)?;
    let (docs, map) = synthesize_multitopic(&base, &JoinSpec::new(i, mode))?;
    fs::create_dir_all(out)?;
    fs::write(out.join("corpus.smart"), write_smart(&docs))?;
    fs::write(out.join("constituents.csv"), map.to_csv())?;
    println!(
        "wrote {} joined documents to {}",
        docs.len(),
        out.join("corpus.smart").display()
    );
    Ok(())
}
