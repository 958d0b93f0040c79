use std::fs;
use std::path::{Path, PathBuf};

use dnmf_core::dnmf::{Algo, SolverConfig};
use dnmf_core::eval::{MetricOptions, PairMode};
use dnmf_core::{CorpusFormat, MbnConfig};
use serde::{Deserialize, Serialize};

use crate::args::RunArgs;
use crate::error::{CliError, CliResult};

/// Contents of a `--config` file. Keys mirror the long flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    format: Option<String>,
    algo: Option<String>,
    topics: Option<usize>,
    delta: Option<f64>,
    clusterings_per_layer: Option<usize>,
    k_top: Option<usize>,
    imbalanced: Option<bool>,
    smallest_class: Option<usize>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    seed: Option<u64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    runs: Option<usize>,
    sizes: Option<Vec<usize>>,
    n_words: Option<usize>,
    pair_mode: Option<String>,
    min_df: Option<usize>,
    indicator: Option<PathBuf>,
    out: Option<PathBuf>,
}

/// Fully resolved settings of a fit or bench invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub algos: Vec<Algo>,
    pub topics: Option<usize>,
    pub delta: f64,
    pub clusterings_per_layer: usize,
    pub k_top: Option<usize>,
    pub imbalanced: bool,
    pub smallest_class: Option<usize>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub runs: usize,
    pub sizes: Vec<usize>,
    pub n_words: usize,
    pub pair_mode: PairMode,
    pub min_df: usize,
    pub indicator: Option<PathBuf>,
    pub out: PathBuf,
}

fn parse_algos(s: &str) -> CliResult<Vec<Algo>> {
    let algos = s
        .split(',')
        .map(|a| a.trim().parse::<Algo>())
        .collect::<Result<Vec<_>, _>>()?;
    if algos.is_empty() {
        return Err(CliError::usage("no algorithm given"));
    }
    Ok(algos)
}

fn must_exist(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage {
            message: format!("{what} {} does not exist", path.display()),
            path: Some(path.to_path_buf()),
        })
    }
}

impl RunSpec {
    /// Merges flags over the optional config file over built-in defaults.
    pub fn resolve(args: &RunArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => {
                must_exist(path, "config file")?;
                let text = fs::read_to_string(path).map_err(|e| crate::error::io_error(path, e))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| CliError::Usage {
                    message: format!("{}: {e}", path.display()),
                    path: Some(path.clone()),
                })?
            }
            None => FileConfig::default(),
        };
        let solver = SolverConfig::default();
        let mbn = MbnConfig::default();
        let metrics = MetricOptions::default();

        let corpus = args
            .corpus
            .clone()
            .or(file.corpus)
            .ok_or_else(|| CliError::usage("--corpus is required"))?;
        let format = args
            .format
            .clone()
            .or(file.format)
            .map(|f| f.parse::<CorpusFormat>())
            .transpose()?
            .unwrap_or(CorpusFormat::Jsonl);
        let algos = match args.algo.clone().or(file.algo) {
            Some(a) => parse_algos(&a)?,
            None => vec![solver.algo],
        };
        let pair_mode = args
            .pair_mode
            .clone()
            .or(file.pair_mode)
            .map(|m| m.parse::<PairMode>())
            .transpose()?
            .unwrap_or(metrics.pair_mode);

        let spec = RunSpec {
            corpus,
            format,
            algos,
            topics: args.topics.or(file.topics),
            delta: args.delta.or(file.delta).unwrap_or(mbn.delta),
            clusterings_per_layer: args
                .clusterings_per_layer
                .or(file.clusterings_per_layer)
                .unwrap_or(mbn.clusterings),
            k_top: args.k_top.or(file.k_top),
            imbalanced: args.imbalanced || file.imbalanced.unwrap_or(false),
            smallest_class: args.smallest_class.or(file.smallest_class),
            lambda1: args.lambda1.or(file.lambda1).unwrap_or(solver.lambda1),
            lambda2: args.lambda2.or(file.lambda2).unwrap_or(solver.lambda2),
            seed: args.seed.or(file.seed).unwrap_or(0),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(solver.max_iter),
            tol: args.tol.or(file.tol).unwrap_or(solver.rel_tol),
            runs: args.runs.or(file.runs).unwrap_or(50),
            sizes: args.sizes.clone().or(file.sizes).unwrap_or_default(),
            n_words: args.n_words.or(file.n_words).unwrap_or(metrics.n_words),
            pair_mode,
            min_df: args.min_df.or(file.min_df).unwrap_or(1),
            indicator: args.indicator.clone().or(file.indicator),
            out: args
                .out
                .clone()
                .or(file.out)
                .ok_or_else(|| CliError::usage("--out is required"))?,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> CliResult<()> {
        must_exist(&self.corpus, "corpus")?;
        if let Some(p) = &self.indicator {
            must_exist(p, "indicator")?;
        }
        if self.runs == 0 {
            return Err(CliError::usage("--runs must be at least 1"));
        }
        if self.n_words == 0 {
            return Err(CliError::usage("--n-words must be at least 1"));
        }
        if self.min_df == 0 {
            return Err(CliError::usage("--min-df must be at least 1"));
        }
        self.solver(self.algos[0], 2).validate()?;
        self.mbn(2, 0).validate()?;
        Ok(())
    }

    pub fn solver(&self, algo: Algo, topics: usize) -> SolverConfig {
        SolverConfig {
            algo,
            topics,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            max_iter: self.max_iter,
            rel_tol: self.tol,
            seed: self.seed,
            track_kkt: false,
        }
    }

    pub fn mbn(&self, topics: usize, seed: u64) -> MbnConfig {
        MbnConfig {
            clusterings: self.clusterings_per_layer,
            delta: self.delta,
            k_top: self.k_top,
            topics,
            imbalanced: self.imbalanced,
            smallest_class: self.smallest_class,
            seed,
        }
    }

    pub fn metrics(&self) -> MetricOptions {
        MetricOptions {
            n_words: self.n_words,
            pair_mode: self.pair_mode,
            ..MetricOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("c.jsonl");
        fs::write(&corpus, "").unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(
            &cfg,
            format!(
                "corpus = {:?}\nalgo = \"nmf,cdnmf\"\ntopics = 4\nseed = 9\nout = \"o\"\n",
                corpus.display().to_string()
            ),
        )
        .unwrap();
        let args = RunArgs {
            config: Some(cfg.clone()),
            seed: Some(3),
            ..RunArgs::default()
        };
        let spec = RunSpec::resolve(&args).unwrap();
        assert_eq!(spec.algos, [Algo::Nmf, Algo::Cdnmf]);
        assert_eq!(spec.topics, Some(4));
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.delta, 0.5);
    }

    #[test]
    fn unknown_keys_and_missing_paths_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "colour = 1\n").unwrap();
        let args = RunArgs {
            config: Some(cfg),
            ..RunArgs::default()
        };
        assert_eq!(RunSpec::resolve(&args).unwrap_err().exit_code(), 2);
        let args = RunArgs {
            corpus: Some(dir.path().join("missing.jsonl")),
            out: Some(dir.path().join("o")),
            ..RunArgs::default()
        };
        let err = RunSpec::resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_json().contains("missing.jsonl"));
    }
}
