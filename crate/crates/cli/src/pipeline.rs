use std::fs;
use std::path::{Path, PathBuf};

use dnmf_core::dnmf::{solve, Algo, FactorState, KktResidual, RunReport};
use dnmf_core::eval::{
    clustering_accuracy, coherence_summary, similarity_count, top_words, MetricOptions,
    MetricsReport, TopicWords,
};
use dnmf_core::mbn::{cluster_documents, ClusterIndicator, MbnModel, MODEL_VERSION};
use dnmf_core::numerics::{mtx, stage_seed, DenseMatrix};
use dnmf_core::{Corpus, CorpusOptions};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliError, CliResult};
use crate::spec::RunSpec;

pub const MANIFEST: &str = "manifest.json";
pub const INDICATOR_FILE: &str = "fd.mtx";
pub const C_FILE: &str = "C.mtx";
pub const W_FILE: &str = "W.mtx";
pub const TRACE_FILE: &str = "trace.csv";
pub const TOPICS_FILE: &str = "topics.tsv";
pub const METRICS_FILE: &str = "metrics.json";
pub const MBN_MODEL_FILE: &str = "mbn_model.json";

pub fn load_corpus(spec: &RunSpec) -> CliResult<Corpus> {
    let opts = CorpusOptions {
        min_df: spec.min_df,
        ..CorpusOptions::default()
    };
    Ok(Corpus::load(&spec.corpus, spec.format, &opts)?)
}

/// Metrics of a fitted model plus the topic words they were computed from.
pub fn score(
    corpus: &Corpus,
    c: &DenseMatrix,
    topic_document: &DenseMatrix,
    opts: &MetricOptions,
) -> CliResult<(TopicWords, MetricsReport)> {
    let pred = topic_document.argmax_columns();
    let acc = corpus
        .labels()
        .map(|gold| clustering_accuracy(&pred, gold))
        .transpose()?;
    let topics = top_words(&c.normalize_columns_l1(), opts.n_words.min(c.rows()))?;
    let coherence = coherence_summary(&topics, opts, |words| corpus.cooccurrence_stats(words))?;
    let simcount = similarity_count(&topics, opts.n_words)?;
    Ok((
        topics,
        MetricsReport {
            acc,
            coherence,
            simcount,
        },
    ))
}

/// The indicator `f(D)`, from file or from MBN clustering.
pub fn indicator(
    spec: &RunSpec,
    corpus: &Corpus,
    topics: usize,
    seed: u64,
) -> CliResult<(ClusterIndicator, Option<MbnModel>)> {
    if let Some(path) = &spec.indicator {
        let ind = ClusterIndicator::from_dense(&mtx::read_dense(path)?)?;
        if ind.k() != topics || ind.n_docs() != corpus.n_docs() {
            return Err(CliError::Usage {
                message: format!(
                    "indicator is {} x {}, expected {topics} x {}",
                    ind.k(),
                    ind.n_docs(),
                    corpus.n_docs()
                ),
                path: Some(path.clone()),
            });
        }
        return Ok((ind, None));
    }
    let (model, ind) = cluster_documents(corpus.tfidf(), &spec.mbn(topics, seed))?;
    Ok((ind, Some(model)))
}

fn trace_csv(report: &RunReport) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("iteration,objective,kkt_C,kkt_W,kkt_T\n");
    for (i, obj) in report.objective_trace.iter().enumerate() {
        let k: Option<&KktResidual> = report.kkt_trace.get(i);
        out.push_str(&format!(
            "{i},{obj},{},{},{}\n",
            cell(k.map(|k| k.c)),
            cell(k.and_then(|k| k.w)),
            cell(k.and_then(|k| k.t)),
        ));
    }
    out
}

fn hash_path(hasher: &mut Sha256, root: &Path, path: &Path) -> CliResult<()> {
    if path.is_dir() {
        let mut entries = fs::read_dir(path)
            .map_err(|e| io_error(path, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| io_error(path, err)))
            .collect::<CliResult<Vec<_>>>()?;
        entries.sort();
        for e in entries {
            hash_path(hasher, root, &e)?;
        }
    } else {
        let rel = path.strip_prefix(root).unwrap_or(path);
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0]);
        hasher.update(fs::read(path).map_err(|e| io_error(path, e))?);
    }
    Ok(())
}

/// SHA-256 over a file, or over the sorted relative paths and contents of a
/// directory tree.
pub fn corpus_digest(path: &Path) -> CliResult<String> {
    let mut hasher = Sha256::new();
    hash_path(&mut hasher, path, path)?;
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[derive(Debug, Serialize)]
struct CorpusInfo {
    sha256: String,
    n_docs: usize,
    n_words: usize,
    labelled: bool,
}

#[derive(Debug, Serialize)]
struct Seeds {
    base: u64,
    mbn_layers: u64,
    mbn_spectral: u64,
    init_c: u64,
    init_w: u64,
    init_t: u64,
}

#[derive(Debug, Serialize)]
struct SolverSummary {
    iterations: usize,
    converged: bool,
    final_objective: f64,
    final_kkt: KktResidual,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    mbn_model_version: u32,
    command: &'static str,
    spec: &'a RunSpec,
    topics: usize,
    corpus: CorpusInfo,
    seeds: Seeds,
    mbn_widths: Option<Vec<usize>>,
    solver: SolverSummary,
    files: Vec<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct FitMetrics {
    pub algo: Algo,
    #[serde(flatten)]
    pub report: MetricsReport,
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Everything `fit` computed, as written to disk.
#[derive(Debug)]
pub struct FitOutcome {
    pub out: PathBuf,
    pub state: FactorState,
    pub report: RunReport,
    pub metrics: FitMetrics,
    pub topics: TopicWords,
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(&path, contents).map_err(|e| io_error(path, e))
}

pub fn fit(spec: &RunSpec) -> CliResult<FitOutcome> {
    let [algo] = spec.algos[..] else {
        return Err(CliError::usage("fit takes exactly one --algo"));
    };
    let corpus = load_corpus(spec)?;
    let k = spec
        .topics
        .ok_or_else(|| CliError::usage("--topics is required"))?;
    let (f, model) = if algo.needs_indicator() || spec.indicator.is_some() {
        let (ind, model) = indicator(spec, &corpus, k, spec.seed)?;
        (Some(ind.to_dense()), model)
    } else {
        (None, None)
    };
    let cfg = dnmf_core::SolverConfig {
        track_kkt: true,
        ..spec.solver(algo, k)
    };
    let (state, report) = solve(&cfg, corpus.tfidf(), f.as_ref())?;
    let w = state.topic_document(algo, f.as_ref())?;
    let (topics, metrics) = score(&corpus, &state.c, &w, &spec.metrics())?;
    let metrics = FitMetrics {
        algo,
        report: metrics,
        final_objective: report.final_objective,
        iterations: report.iterations,
        converged: report.converged,
    };

    let out = &spec.out;
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let mut files = Vec::new();
    if let Some(f) = &f {
        mtx::write_dense(out.join(INDICATOR_FILE), f)?;
        files.push(INDICATOR_FILE);
    }
    if let Some(model) = &model {
        write(out.join(MBN_MODEL_FILE), model.to_json()?)?;
        files.push(MBN_MODEL_FILE);
    }
    mtx::write_dense(out.join(C_FILE), &state.c)?;
    mtx::write_dense(out.join(W_FILE), &w)?;
    write(out.join(TRACE_FILE), trace_csv(&report))?;
    write(
        out.join(TOPICS_FILE),
        topics.to_tsv(corpus.vocabulary().words())?,
    )?;
    let metrics_json = serde_json::to_string_pretty(&metrics).map_err(dnmf_core::Error::from)?;
    write(out.join(METRICS_FILE), metrics_json + "\n")?;
    files.extend([C_FILE, W_FILE, TRACE_FILE, TOPICS_FILE, METRICS_FILE]);

    let manifest = Manifest {
        tool: "dnmf",
        version: env!("CARGO_PKG_VERSION"),
        mbn_model_version: MODEL_VERSION,
        command: "fit",
        spec,
        topics: k,
        corpus: CorpusInfo {
            sha256: corpus_digest(&spec.corpus)?,
            n_docs: corpus.n_docs(),
            n_words: corpus.n_words(),
            labelled: corpus.labels().is_some(),
        },
        seeds: Seeds {
            base: spec.seed,
            mbn_layers: stage_seed(spec.seed, "mbn.layers"),
            mbn_spectral: stage_seed(spec.seed, "mbn.spectral"),
            init_c: stage_seed(spec.seed, "init.C"),
            init_w: stage_seed(spec.seed, "init.W"),
            init_t: stage_seed(spec.seed, "init.T"),
        },
        mbn_widths: model.as_ref().map(MbnModel::widths),
        solver: SolverSummary {
            iterations: report.iterations,
            converged: report.converged,
            final_objective: report.final_objective,
            final_kkt: report.final_kkt,
        },
        files,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).map_err(dnmf_core::Error::from)?;
    write(out.join(MANIFEST), manifest_json + "\n")?;

    Ok(FitOutcome {
        out: out.clone(),
        state,
        report,
        metrics,
        topics,
    })
}

/// Metrics of the factors stored in a fit output directory.
pub fn eval(corpus: &Corpus, factors: &Path, opts: &MetricOptions) -> CliResult<MetricsReport> {
    let c = mtx::read_dense(factors.join(C_FILE))?;
    let w = mtx::read_dense(factors.join(W_FILE))?;
    if c.rows() != corpus.n_words() || w.cols() != corpus.n_docs() || c.cols() != w.rows() {
        return Err(CliError::Usage {
            message: format!(
                "factors are {} x {} and {} x {}, corpus has {} words and {} documents",
                c.rows(),
                c.cols(),
                w.rows(),
                w.cols(),
                corpus.n_words(),
                corpus.n_docs()
            ),
            path: Some(factors.to_path_buf()),
        });
    }
    Ok(score(corpus, &c, &w, opts)?.1)
}
