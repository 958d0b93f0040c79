use std::collections::BTreeSet;
use std::fs;

use dnmf_core::corpus::load_raw;
use dnmf_core::dnmf::{solve, Algo};
use dnmf_core::numerics::{derive_seed, stage_seed, stream};
use dnmf_core::{Corpus, CorpusOptions, Error};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, CliResult};
use crate::pipeline::{indicator, score};
use crate::spec::RunSpec;

pub const BENCH_FILE: &str = "bench.csv";
pub const MEAN_RUN: &str = "mean";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: Algo,
    pub size: usize,
    /// Run index, or `mean` for aggregate rows.
    pub run: String,
    pub seed: Option<u64>,
    pub acc: f64,
    pub coherence: f64,
    pub simcount: f64,
    pub iterations: f64,
    pub final_objective: f64,
}

/// Seed of one Monte-Carlo run; it drives the class draw, MBN and the solver.
pub fn run_seed(seed: u64, size: usize, run: usize) -> u64 {
    derive_seed(stage_seed(seed, "bench"), &[size as u64, run as u64])
}

/// Classes drawn for one run, as sorted indices into the sorted class names.
pub fn draw_classes(run_seed: u64, n_classes: usize, size: usize) -> Vec<usize> {
    let mut rng = stream(stage_seed(run_seed, "bench.subset"));
    let mut picked = index::sample(&mut rng, n_classes, size).into_vec();
    picked.sort_unstable();
    picked
}

fn one_run(
    spec: &RunSpec,
    raw: &dnmf_core::corpus::RawCorpus,
    labels: &[String],
    classes: &[String],
    size: usize,
    run: usize,
) -> CliResult<Vec<BenchRow>> {
    let seed = run_seed(spec.seed, size, run);
    let chosen: BTreeSet<&str> = draw_classes(seed, classes.len(), size)
        .into_iter()
        .map(|c| classes[c].as_str())
        .collect();
    let docs: Vec<usize> = (0..labels.len())
        .filter(|&j| chosen.contains(labels[j].as_str()))
        .collect();
    let opts = CorpusOptions {
        min_df: spec.min_df,
        ..CorpusOptions::default()
    };
    let corpus = Corpus::from_raw(&raw.select(&docs), &opts)?;
    let f = if spec.algos.iter().any(|a| a.needs_indicator()) {
        Some(indicator(spec, &corpus, size, seed)?.0.to_dense())
    } else {
        None
    };
    let dir = spec
        .out
        .join("runs")
        .join(format!("size{size:03}-run{run:03}"));
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut rows = Vec::new();
    for &algo in &spec.algos {
        let cfg = dnmf_core::SolverConfig {
            seed,
            ..spec.solver(algo, size)
        };
        let f = if algo.needs_indicator() {
            f.as_ref()
        } else {
            None
        };
        let (state, report) = solve(&cfg, corpus.tfidf(), f)?;
        let w = state.topic_document(algo, f)?;
        let (_, metrics) = score(&corpus, &state.c, &w, &spec.metrics())?;
        let path = dir.join(format!("metrics-{algo}.json"));
        let json = serde_json::to_string_pretty(&metrics).map_err(Error::from)?;
        fs::write(&path, json + "\n").map_err(|e| io_error(&path, e))?;
        rows.push(BenchRow {
            algo,
            size,
            run: run.to_string(),
            seed: Some(seed),
            acc: metrics.acc.expect("bench corpora are labelled"),
            coherence: metrics.coherence.mean,
            simcount: metrics.simcount.total as f64,
            iterations: report.iterations as f64,
            final_objective: report.final_objective,
        });
    }
    Ok(rows)
}

/// Per-run rows followed by one mean row per (algo, size).
pub fn bench(spec: &RunSpec) -> CliResult<Vec<BenchRow>> {
    if spec.indicator.is_some() {
        return Err(CliError::usage(
            "bench computes its own indicators; drop --indicator",
        ));
    }
    if spec.sizes.is_empty() {
        return Err(CliError::usage("--sizes is required for bench"));
    }
    let raw = load_raw(&spec.corpus, spec.format)?;
    let labels = raw.label_strings().ok_or(Error::MissingLabels)?;
    let classes: Vec<String> = labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for &s in &spec.sizes {
        if s < 2 || s > classes.len() {
            return Err(CliError::usage(format!(
                "subset size {s} outside 2..={} (number of classes)",
                classes.len()
            )));
        }
    }
    let tasks: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&s| (0..spec.runs).map(move |r| (s, r)))
        .collect();
    let per_run = tasks
        .par_iter()
        .map(|&(s, r)| one_run(spec, &raw, &labels, &classes, s, r))
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows: Vec<BenchRow> = per_run.into_iter().flatten().collect();

    let mut means = Vec::new();
    for &size in &spec.sizes {
        for &algo in &spec.algos {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.algo == algo && r.size == size)
                .collect();
            let mean = |f: fn(&BenchRow) -> f64| {
                group.iter().map(|r| f(r)).sum::<f64>() / group.len() as f64
            };
            means.push(BenchRow {
                algo,
                size,
                run: MEAN_RUN.into(),
                seed: None,
                acc: mean(|r| r.acc),
                coherence: mean(|r| r.coherence),
                simcount: mean(|r| r.simcount),
                iterations: mean(|r| r.iterations),
                final_objective: mean(|r| r.final_objective),
            });
        }
    }
    rows.extend(means);

    fs::create_dir_all(&spec.out).map_err(|e| io_error(&spec.out, e))?;
    let path = spec.out.join(BENCH_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_error(&path, e))?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_error(&path, e))?;
    }
    w.flush().map_err(|e| io_error(&path, e))?;
    Ok(rows)
}
