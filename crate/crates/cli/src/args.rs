use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dnmf", version, about = "Deep-NMF topic modeling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster, factorize and score one corpus.
    Fit(RunArgs),
    /// Monte-Carlo runs over random class subsets of a labelled corpus.
    Bench(RunArgs),
    /// Generate a planted-topic JSONL corpus.
    Synth(SynthArgs),
    /// Score precomputed factors against a corpus.
    Eval(EvalArgs),
}

/// Pipeline settings. Every flag overrides the same key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with any of the keys below (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// jsonl, dir-per-class or matrixmarket.
    #[arg(long)]
    pub format: Option<String>,
    /// nmf, bdnmf, sdnmf or cdnmf; bench accepts a comma-separated list.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub clusterings_per_layer: Option<usize>,
    /// Overrides the top MBN layer width.
    #[arg(long)]
    pub k_top: Option<usize>,
    #[arg(long)]
    pub imbalanced: bool,
    #[arg(long)]
    pub smallest_class: Option<usize>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated topic-subset sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub n_words: Option<usize>,
    /// ranked or all-ordered.
    #[arg(long)]
    pub pair_mode: Option<String>,
    #[arg(long)]
    pub min_df: Option<usize>,
    /// K × N indicator in MatrixMarket format, replacing MBN clustering.
    #[arg(long)]
    pub indicator: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 50)]
    pub docs_per_class: usize,
    #[arg(long, default_value_t = 40)]
    pub vocab_per_class: usize,
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,
    #[arg(long, default_value_t = 80)]
    pub doc_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "jsonl")]
    pub format: String,
    /// Directory holding `C.mtx` and `W.mtx` from a fit.
    #[arg(long)]
    pub factors: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub n_words: usize,
    #[arg(long, default_value = "ranked")]
    pub pair_mode: String,
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    /// Write metrics here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
