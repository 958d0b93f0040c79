//! Clustering accuracy, topic coherence, similarity count and topic words.

mod hungarian;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use hungarian::max_weight_assignment;

use crate::corpus::CooccurrenceTable;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_N_WORDS: usize = 20;

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| map[l]).collect(), map.len())
}

/// Fraction of documents whose predicted cluster maps to their gold class
/// under the best one-to-one relabeling.
pub fn clustering_accuracy(pred: &[usize], gold: &[usize]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::Shape {
            op: "clustering_accuracy",
            left: (pred.len(), 1),
            right: (gold.len(), 1),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid(
            "clustering_accuracy needs at least one document",
        ));
    }
    let (p, kp) = dense_ids(pred);
    let (g, kg) = dense_ids(gold);
    let mut table = vec![vec![0i64; kg]; kp];
    for (&a, &b) in p.iter().zip(&g) {
        table[a][b] += 1;
    }
    let (_, matched) = max_weight_assignment(&table);
    Ok(matched as f64 / pred.len() as f64)
}

/// Leading words of each topic with their weights, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWords {
    pub topics: Vec<Vec<(usize, f64)>>,
}

impl TopicWords {
    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Word indices of topic `k` in rank order.
    pub fn indices(&self, k: usize) -> Vec<usize> {
        self.topics[k].iter().map(|&(w, _)| w).collect()
    }

    /// Tab-separated `topic rank word weight` lines with a header.
    pub fn to_tsv(&self, vocab: &[String]) -> Result<String> {
        let mut out = String::from("topic\trank\tword\tweight\n");
        for (k, words) in self.topics.iter().enumerate() {
            for (rank, &(w, weight)) in words.iter().enumerate() {
                let word = vocab
                    .get(w)
                    .ok_or_else(|| Error::invalid(format!("word index {w} outside vocabulary")))?;
                writeln!(out, "{k}\t{}\t{word}\t{weight}", rank + 1).expect("write to string");
            }
        }
        Ok(out)
    }
}

/// Top `n_words` rows of every column of `c`, by descending weight with ties
/// going to the lower word index.
pub fn top_words(c: &DenseMatrix, n_words: usize) -> Result<TopicWords> {
    if n_words > c.rows() {
        return Err(Error::invalid(format!(
            "asked for {n_words} topic words but the vocabulary has {}",
            c.rows()
        )));
    }
    let topics = (0..c.cols())
        .map(|k| {
            let col = c.column(k);
            let mut order: Vec<usize> = (0..col.len()).collect();
            order.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
            order.truncate(n_words);
            order.into_iter().map(|i| (i, col[i])).collect()
        })
        .collect();
    Ok(TopicWords { topics })
}

/// Which ordered word pairs enter the coherence sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    /// `v1` ranked strictly above `v2`.
    #[default]
    Ranked,
    /// Every ordered pair of distinct words.
    AllOrdered,
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ranked" => Ok(PairMode::Ranked),
            "all-ordered" => Ok(PairMode::AllOrdered),
            other => Err(Error::invalid(format!(
                "unknown pair mode {other:?} (expected ranked or all-ordered)"
            ))),
        }
    }
}

/// `Σ log((freq(v1, v2) + ε) / freq(v2))` over the pairs of `topic`.
///
/// `topic` holds word indices in rank order; `table` must list them. Pairs
/// whose second word never occurs are skipped.
pub fn coherence(
    topic: &[usize],
    table: &CooccurrenceTable,
    eps: f64,
    mode: PairMode,
) -> Result<f64> {
    let pos: Vec<usize> =
        topic
            .iter()
            .map(|w| {
                table.words().iter().position(|x| x == w).ok_or_else(|| {
                    Error::invalid(format!("word {w} missing from co-occurrence table"))
                })
            })
            .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (a, &pa) in pos.iter().enumerate() {
        for (b, &pb) in pos.iter().enumerate() {
            let take = match mode {
                PairMode::Ranked => a < b,
                PairMode::AllOrdered => a != b,
            };
            if !take {
                continue;
            }
            let f2 = table.freq(pb);
            if f2 == 0 {
                continue;
            }
            total += ((table.pair_freq(pa, pb) as f64 + eps) / f2 as f64).ln();
        }
    }
    Ok(total)
}

/// Overlap counts between the leading word lists of every topic pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityCount {
    pub total: usize,
    /// Symmetric K × K table, zero diagonal.
    pub pairs: Vec<Vec<usize>>,
}

/// Counts words shared by the first `n_words` words of each topic pair.
pub fn similarity_count(topics: &TopicWords, n_words: usize) -> Result<SimilarityCount> {
    let k = topics.len();
    if k < 2 {
        return Err(Error::invalid("similarity count needs at least two topics"));
    }
    let sets: Vec<Vec<usize>> = topics
        .topics
        .iter()
        .map(|t| {
            let mut s: Vec<usize> = t.iter().take(n_words).map(|&(w, _)| w).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut pairs = vec![vec![0; k]; k];
    let mut total = 0;
    for a in 0..k {
        for b in a + 1..k {
            let n = sets[a]
                .iter()
                .filter(|w| sets[b].binary_search(w).is_ok())
                .count();
            pairs[a][b] = n;
            pairs[b][a] = n;
            total += n;
        }
    }
    Ok(SimilarityCount { total, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub mean: f64,
    pub per_topic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: Option<f64>,
    pub coherence: CoherenceSummary,
    pub simcount: SimilarityCount,
}

/// Metric settings shared by fit, bench and eval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub n_words: usize,
    pub eps: f64,
    pub pair_mode: PairMode,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            n_words: DEFAULT_N_WORDS,
            eps: DEFAULT_EPS,
            pair_mode: PairMode::Ranked,
        }
    }
}

/// Coherence of every topic against co-occurrence statistics from `table_for`.
pub fn coherence_summary(
    topics: &TopicWords,
    opts: &MetricOptions,
    mut table_for: impl FnMut(&[usize]) -> Result<CooccurrenceTable>,
) -> Result<CoherenceSummary> {
    let per_topic = (0..topics.len())
        .map(|k| {
            let words = topics.indices(k);
            let table = table_for(&words)?;
            coherence(&words, &table, opts.eps, opts.pair_mode)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    Ok(CoherenceSummary { mean, per_topic })
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
