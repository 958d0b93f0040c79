//! Planted-topic corpora for testing.
//!
//! Every class owns a block of words drawn with Zipf-like frequencies; with
//! probability `overlap` a token comes instead from a pool shared by all
//! classes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::numerics::{stage_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub docs_per_class: usize,
    pub vocab_per_class: usize,
    /// Probability that a token comes from the shared pool, in `[0, 1)`.
    pub overlap: f64,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 3,
            docs_per_class: 50,
            vocab_per_class: 40,
            overlap: 0.0,
            doc_len: 80,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.docs_per_class == 0 || self.vocab_per_class == 0 {
            return Err(Error::invalid(
                "classes, docs per class and vocabulary per class must be positive",
            ));
        }
        if self.doc_len == 0 {
            return Err(Error::invalid("document length must be positive"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::invalid(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }

    /// Size of the shared pool.
    pub fn pool_size(&self) -> usize {
        (self.overlap * (self.vocab_per_class * self.classes) as f64).round() as usize
    }
}

pub fn class_word(class: usize, rank: usize) -> String {
    format!("c{class:02}w{rank:04}")
}

pub fn pool_word(i: usize) -> String {
    format!("pool{i:04}")
}

pub fn class_label(class: usize) -> String {
    format!("class{class:02}")
}

/// The words owned by `class`.
pub fn class_vocabulary(class: usize, vocab_per_class: usize) -> Vec<String> {
    (0..vocab_per_class).map(|r| class_word(class, r)).collect()
}

/// Generates the labeled documents, class by class.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<Document>> {
    cfg.validate()?;
    let mut rng = stream(stage_seed(cfg.seed, "synth"));
    let zipf = WeightedIndex::new((0..cfg.vocab_per_class).map(|r| 1.0 / (r + 1) as f64))
        .map_err(|e| Error::invalid(e.to_string()))?;
    let pool = cfg.pool_size();
    let width = (cfg.classes * cfg.docs_per_class).to_string().len();
    let mut docs = Vec::with_capacity(cfg.classes * cfg.docs_per_class);
    for class in 0..cfg.classes {
        for i in 0..cfg.docs_per_class {
            let tokens = (0..cfg.doc_len)
                .map(|_| {
                    if pool > 0 && rng.random::<f64>() < cfg.overlap {
                        pool_word(rng.random_range(0..pool))
                    } else {
                        class_word(class, zipf.sample(&mut rng))
                    }
                })
                .collect();
            docs.push(Document {
                id: format!("d{:0width$}", class * cfg.docs_per_class + i),
                tokens,
                label: Some(class_label(class)),
            });
        }
    }
    Ok(docs)
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    text: String,
    label: Option<&'a str>,
}

/// One JSON object per line, in the loader's format.
pub fn to_jsonl(docs: &[Document]) -> Result<String> {
    let mut out = String::new();
    for d in docs {
        let rec = Record {
            id: &d.id,
            text: d.tokens.join(" "),
            label: d.label.as_deref(),
        };
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::path::Path;

    use super::*;
    use crate::corpus::{parse_jsonl, Corpus, CorpusOptions};

    #[test]
    fn disjoint_without_overlap() {
        let docs = generate(&SynthConfig::default()).unwrap();
        assert_eq!(docs.len(), 150);
        for d in &docs {
            let class: usize = d.label.as_ref().unwrap()[5..].parse().unwrap();
            let own: BTreeSet<String> = class_vocabulary(class, 40).into_iter().collect();
            assert!(d.tokens.iter().all(|t| own.contains(t)));
        }
    }

    #[test]
    fn vocabulary_bound_with_overlap() {
        let cfg = SynthConfig {
            overlap: 0.1,
            ..SynthConfig::default()
        };
        assert_eq!(cfg.pool_size(), 12);
        let docs = generate(&cfg).unwrap();
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        assert_eq!(c.n_docs(), 150);
        assert!(c.n_words() <= 132);
    }

    #[test]
    fn round_trips_through_jsonl() {
        let cfg = SynthConfig {
            overlap: 0.3,
            seed: 4,
            ..SynthConfig::default()
        };
        let text = to_jsonl(&generate(&cfg).unwrap()).unwrap();
        assert_eq!(text, to_jsonl(&generate(&cfg).unwrap()).unwrap());
        let back = parse_jsonl(&text, Path::new("synth")).unwrap();
        assert_eq!(back, generate(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_overlap() {
        for overlap in [1.0, -0.1, f64::NAN] {
            assert!(generate(&SynthConfig {
                overlap,
                ..SynthConfig::default()
            })
            .is_err());
        }
    }
}
