//! Command-line pipeline: corpus ingestion, MBN clustering, factorization,
//! metrics, Monte-Carlo benchmarking and synthetic corpora.

pub mod args;
pub mod bench;
pub mod error;
pub mod pipeline;
pub mod spec;

use std::fs;

use dnmf_core::corpus::CorpusFormat;
use dnmf_core::eval::{MetricOptions, PairMode};
use dnmf_core::synth::{generate, to_jsonl, SynthConfig};
use dnmf_core::{Corpus, CorpusOptions};
use serde_json::json;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};
pub use spec::RunSpec;

use crate::error::io_error;

/// Runs one subcommand; the returned string is printed on stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Fit(args) => {
            let spec = RunSpec::resolve(&args)?;
            let out = pipeline::fit(&spec)?;
            Ok(json!({
                "out": out.out.display().to_string(),
                "algo": out.metrics.algo,
                "acc": out.metrics.report.acc,
                "coherence": out.metrics.report.coherence.mean,
                "simcount": out.metrics.report.simcount.total,
                "iterations": out.report.iterations,
                "final_objective": out.report.final_objective,
            })
            .to_string())
        }
        Command::Bench(args) => {
            let spec = RunSpec::resolve(&args)?;
            let rows = bench::bench(&spec)?;
            Ok(json!({
                "out": spec.out.join(bench::BENCH_FILE).display().to_string(),
                "rows": rows.len(),
            })
            .to_string())
        }
        Command::Synth(args) => {
            let cfg = SynthConfig {
                classes: args.classes,
                docs_per_class: args.docs_per_class,
                vocab_per_class: args.vocab_per_class,
                overlap: args.overlap,
                doc_len: args.doc_len,
                seed: args.seed,
            };
            let text = to_jsonl(&generate(&cfg)?)?;
            if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
            }
            fs::write(&args.out, text).map_err(|e| io_error(&args.out, e))?;
            Ok(json!({
                "out": args.out.display().to_string(),
                "documents": cfg.classes * cfg.docs_per_class,
            })
            .to_string())
        }
        Command::Eval(args) => {
            let format: CorpusFormat = args.format.parse()?;
            let opts = CorpusOptions {
                min_df: args.min_df,
                ..CorpusOptions::default()
            };
            let corpus = Corpus::load(&args.corpus, format, &opts)?;
            let metrics = MetricOptions {
                n_words: args.n_words,
                pair_mode: args.pair_mode.parse::<PairMode>()?,
                ..MetricOptions::default()
            };
            let report = pipeline::eval(&corpus, &args.factors, &metrics)?;
            let text = report.to_json()?;
            match &args.out {
                Some(path) => {
                    fs::write(path, text + "\n").map_err(|e| io_error(path, e))?;
                    Ok(json!({ "out": path.display().to_string() }).to_string())
                }
                None => Ok(text),
            }
        }
    }
}
