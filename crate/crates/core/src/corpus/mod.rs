//! Corpus ingestion: tokenized documents to TF-IDF and occurrence matrices.

mod load;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

pub use load::{load_raw, parse_jsonl, tokenize, CorpusFormat, Document, RawCorpus};

use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;

/// Ordered word list with a reverse index and document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl Vocabulary {
    fn new(words: Vec<String>, doc_freq: Vec<usize>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary {
            words,
            index,
            doc_freq,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }
}

/// Options controlling vocabulary construction.
#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub min_df: usize,
    pub stopwords: HashSet<String>,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            min_df: 1,
            stopwords: HashSet::new(),
        }
    }
}

/// A document collection with its document-word matrices (words × documents).
#[derive(Debug, Clone)]
pub struct Corpus {
    ids: Vec<String>,
    labels: Option<Vec<usize>>,
    label_names: Vec<String>,
    vocab: Vocabulary,
    counts: SparseMatrix,
    tfidf: SparseMatrix,
    binary: SparseMatrix,
}

/// TF-IDF weighting of a word × document count matrix.
///
/// `tf` is the raw count and `idf = ln(N / df)`. Words with `df < min_df` and
/// words whose idf is zero (present in every document) are removed. Returns
/// the weighted matrix over the surviving words and their original row
/// indices. Columns are not length-normalized.
pub fn build_tfidf(counts: &SparseMatrix, min_df: usize) -> Result<(SparseMatrix, Vec<usize>)> {
    if min_df == 0 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    let n = counts.cols();
    let kept: Vec<usize> = (0..counts.rows())
        .filter(|&v| {
            let df = counts.row(v).0.len();
            df >= min_df && df < n
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    let triplets = kept.iter().enumerate().flat_map(|(new, &v)| {
        let (docs, tf) = counts.row(v);
        let idf = (n as f64 / docs.len() as f64).ln();
        docs.iter().zip(tf).map(move |(&j, &c)| (new, j, c * idf))
    });
    let tfidf = SparseMatrix::from_triplets(kept.len(), n, triplets)?;
    Ok((tfidf, kept))
}

fn binary_of(m: &SparseMatrix) -> SparseMatrix {
    SparseMatrix::from_triplets(
        m.rows(),
        m.cols(),
        m.triplets().map(|(i, j, _)| (i, j, 1.0)),
    )
    .expect("support of a valid matrix is valid")
}

fn encode_labels(labels: Vec<Option<String>>) -> Result<(Option<Vec<usize>>, Vec<String>)> {
    let present = labels.iter().filter(|l| l.is_some()).count();
    if present == 0 {
        return Ok((None, Vec::new()));
    }
    if present != labels.len() {
        return Err(Error::invalid(format!(
            "{} of {} documents carry a label; labels must be all present or all absent",
            present,
            labels.len()
        )));
    }
    let names: Vec<String> = labels
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lookup: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let ids = labels
        .iter()
        .map(|l| lookup[l.as_deref().expect("all present")])
        .collect();
    Ok((Some(ids), names))
}

impl Corpus {
    /// Builds the corpus from tokenized documents (already sorted by id).
    pub fn from_documents(docs: &[Document], opts: &CorpusOptions) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut words: BTreeMap<&str, usize> = BTreeMap::new();
        for d in docs {
            for t in &d.tokens {
                if !opts.stopwords.contains(t) {
                    words.entry(t.as_str()).or_insert(0);
                }
            }
        }
        for (i, v) in words.values_mut().enumerate() {
            *v = i;
        }
        let mut triplets = Vec::new();
        for (j, d) in docs.iter().enumerate() {
            let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
            for t in &d.tokens {
                if let Some(&v) = words.get(t.as_str()) {
                    *tf.entry(v).or_insert(0.0) += 1.0;
                }
            }
            triplets.extend(tf.into_iter().map(|(v, c)| (v, j, c)));
        }
        let counts = SparseMatrix::from_triplets(words.len(), docs.len(), triplets)?;
        let vocab: Vec<String> = words.keys().map(|s| s.to_string()).collect();
        let ids = docs.iter().map(|d| d.id.clone()).collect();
        let labels = docs.iter().map(|d| d.label.clone()).collect();
        Self::assemble(counts, vocab, ids, labels, opts.min_df)
    }

    /// Builds the corpus from a word × document count matrix.
    pub fn from_counts(
        counts: SparseMatrix,
        vocab: Vec<String>,
        ids: Vec<String>,
        labels: Option<Vec<String>>,
        opts: &CorpusOptions,
    ) -> Result<Self> {
        if counts.cols() == 0 {
            return Err(Error::EmptyCorpus);
        }
        let keep: Vec<usize> = (0..vocab.len())
            .filter(|&v| !opts.stopwords.contains(&vocab[v]))
            .collect();
        let counts = counts.select_rows(&keep);
        let vocab = keep.iter().map(|&v| vocab[v].clone()).collect();
        let labels = match labels {
            Some(l) => l.into_iter().map(Some).collect(),
            None => vec![None; counts.cols()],
        };
        Self::assemble(counts, vocab, ids, labels, opts.min_df)
    }

    fn assemble(
        counts: SparseMatrix,
        vocab: Vec<String>,
        ids: Vec<String>,
        labels: Vec<Option<String>>,
        min_df: usize,
    ) -> Result<Self> {
        let (tfidf, kept) = build_tfidf(&counts, min_df)?;
        let counts = counts.select_rows(&kept);
        let binary = binary_of(&counts);
        let doc_freq = (0..binary.rows()).map(|v| binary.row(v).0.len()).collect();
        let vocab = Vocabulary::new(kept.iter().map(|&v| vocab[v].clone()).collect(), doc_freq);
        let (labels, label_names) = encode_labels(labels)?;
        Ok(Corpus {
            ids,
            labels,
            label_names,
            vocab,
            counts,
            tfidf,
            binary,
        })
    }

    pub fn from_raw(raw: &RawCorpus, opts: &CorpusOptions) -> Result<Self> {
        match raw {
            RawCorpus::Documents(docs) => Self::from_documents(docs, opts),
            RawCorpus::Counts {
                counts,
                vocab,
                ids,
                labels,
            } => Self::from_counts(
                counts.clone(),
                vocab.clone(),
                ids.clone(),
                labels.clone(),
                opts,
            ),
        }
    }

    /// Reads and builds in one go.
    pub fn load(
        path: impl AsRef<Path>,
        format: CorpusFormat,
        opts: &CorpusOptions,
    ) -> Result<Self> {
        Self::from_raw(&load_raw(path, format)?, opts)
    }

    pub fn n_docs(&self) -> usize {
        self.ids.len()
    }

    pub fn n_words(&self) -> usize {
        self.vocab.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Gold label ids (indices into [`Corpus::label_names`]), if any.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn counts(&self) -> &SparseMatrix {
        &self.counts
    }

    /// The TF-IDF document-word matrix D (words × documents).
    pub fn tfidf(&self) -> &SparseMatrix {
        &self.tfidf
    }

    pub fn binary(&self) -> &SparseMatrix {
        &self.binary
    }

    /// Document frequencies of `words` and of every pair among them.
    pub fn cooccurrence_stats(&self, words: &[usize]) -> Result<CooccurrenceTable> {
        cooccurrence_stats(&self.binary, words)
    }
}

impl RawCorpus {
    /// Keeps only the documents at the given positions (in the stored order).
    pub fn select(&self, docs: &[usize]) -> RawCorpus {
        match self {
            RawCorpus::Documents(all) => {
                RawCorpus::Documents(docs.iter().map(|&j| all[j].clone()).collect())
            }
            RawCorpus::Counts {
                counts,
                vocab,
                ids,
                labels,
            } => RawCorpus::Counts {
                counts: counts.select_cols(docs),
                vocab: vocab.clone(),
                ids: docs.iter().map(|&j| ids[j].clone()).collect(),
                labels: labels
                    .as_ref()
                    .map(|l| docs.iter().map(|&j| l[j].clone()).collect()),
            },
        }
    }

    /// Label string of every document, if all are labelled.
    pub fn label_strings(&self) -> Option<Vec<String>> {
        match self {
            RawCorpus::Documents(docs) => docs.iter().map(|d| d.label.clone()).collect(),
            RawCorpus::Counts { labels, .. } => labels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            RawCorpus::Documents(d) => d.len(),
            RawCorpus::Counts { ids, .. } => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Document frequencies on binary occurrence for a list of words.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceTable {
    words: Vec<usize>,
    freq: Vec<usize>,
    pair: Vec<usize>,
}

impl CooccurrenceTable {
    pub fn words(&self) -> &[usize] {
        &self.words
    }

    /// Number of documents containing the `a`-th listed word.
    pub fn freq(&self, a: usize) -> usize {
        self.freq[a]
    }

    /// Number of documents containing both the `a`-th and `b`-th listed words.
    pub fn pair_freq(&self, a: usize, b: usize) -> usize {
        self.pair[a * self.words.len() + b]
    }

    /// Builds a table directly from frequencies; `pair` is row-major n × n.
    pub fn from_parts(words: Vec<usize>, freq: Vec<usize>, pair: Vec<usize>) -> Result<Self> {
        let n = words.len();
        if freq.len() != n || pair.len() != n * n {
            return Err(Error::invalid(
                "co-occurrence table parts have inconsistent sizes",
            ));
        }
        Ok(CooccurrenceTable { words, freq, pair })
    }
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Pairwise document frequencies of `words` over a word × document
/// occurrence matrix (any nonzero counts as presence).
pub fn cooccurrence_stats(occurrence: &SparseMatrix, words: &[usize]) -> Result<CooccurrenceTable> {
    if let Some(&bad) = words.iter().find(|&&w| w >= occurrence.rows()) {
        return Err(Error::invalid(format!(
            "word index {bad} out of range for vocabulary of {}",
            occurrence.rows()
        )));
    }
    let n = words.len();
    let docs: Vec<&[usize]> = words.iter().map(|&w| occurrence.row(w).0).collect();
    let freq = docs.iter().map(|d| d.len()).collect();
    let mut pair = vec![0; n * n];
    for a in 0..n {
        for b in a..n {
            let c = intersection_len(docs[a], docs[b]);
            pair[a * n + b] = c;
            pair[b * n + a] = c;
        }
    }
    Ok(CooccurrenceTable {
        words: words.to_vec(),
        freq,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str, label: Option<&str>) -> Document {
        Document {
            id: id.into(),
            tokens: tokenize(text),
            label: label.map(Into::into),
        }
    }

    #[test]
    fn two_document_tfidf() {
        let docs = [doc("1", "xx xx", None), doc("2", "yy", None)];
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        let d = c.tfidf().to_dense();
        let ln2 = 2f64.ln();
        assert_eq!(d.shape(), (2, 2));
        assert_eq!(d[(0, 0)], 2.0 * ln2);
        assert_eq!(d[(0, 1)], 0.0);
        assert_eq!(d[(1, 0)], 0.0);
        assert_eq!(d[(1, 1)], ln2);
        assert!(c.labels().is_none());
    }

    #[test]
    fn ubiquitous_word_dropped() {
        let docs = [doc("1", "the cat", None), doc("2", "the dog", None)];
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        assert_eq!(c.vocabulary().words(), ["cat", "dog"]);
        assert!(c.vocabulary().index_of("the").is_none());
    }

    #[test]
    fn single_document_has_no_informative_words() {
        let docs = [doc("1", "aa aa bb", None)];
        assert!(matches!(
            Corpus::from_documents(&docs, &CorpusOptions::default()),
            Err(Error::EmptyVocabulary { .. })
        ));
    }

    #[test]
    fn min_df_and_stopwords() {
        let docs = [
            doc("1", "alpha beta gamma", None),
            doc("2", "alpha beta", None),
            doc("3", "delta", None),
        ];
        let opts = CorpusOptions {
            min_df: 2,
            stopwords: ["beta".to_string()].into(),
        };
        let c = Corpus::from_documents(&docs, &opts).unwrap();
        assert_eq!(c.vocabulary().words(), ["alpha"]);
        assert_eq!(c.vocabulary().doc_freq(0), 2);
        assert!(build_tfidf(c.counts(), 0).is_err());
    }

    #[test]
    fn cooccurrence_fixture() {
        let docs = [
            doc("1", "aa bb", None),
            doc("2", "aa", None),
            doc("3", "bb", None),
            doc("4", "cc", None),
        ];
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        let a = c.vocabulary().index_of("aa").unwrap();
        let b = c.vocabulary().index_of("bb").unwrap();
        let cc = c.vocabulary().index_of("cc").unwrap();
        let t = c.cooccurrence_stats(&[a, b, cc]).unwrap();
        assert_eq!((t.freq(0), t.freq(1)), (2, 2));
        assert_eq!(t.pair_freq(0, 1), 1);
        assert_eq!(t.pair_freq(0, 0), t.freq(0));
        assert_eq!(t.pair_freq(0, 2), 0);
        assert!(c.cooccurrence_stats(&[99]).is_err());
    }

    #[test]
    fn labels_encoded_in_sorted_order() {
        let docs = [
            doc("1", "aa", Some("sports")),
            doc("2", "bb", Some("arts")),
            doc("3", "aa bb cc", Some("sports")),
        ];
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        assert_eq!(c.label_names(), ["arts", "sports"]);
        assert_eq!(c.labels().unwrap(), [1, 0, 1]);
        let partial = [doc("1", "aa", Some("x")), doc("2", "bb", None)];
        assert!(Corpus::from_documents(&partial, &CorpusOptions::default()).is_err());
    }

    #[test]
    fn binary_matches_count_support() {
        let docs = [doc("1", "aa aa bb", None), doc("2", "bb cc cc cc", None)];
        let c = Corpus::from_documents(&docs, &CorpusOptions::default()).unwrap();
        let counts = c.counts().to_dense();
        let bin = c.binary().to_dense();
        for (x, b) in counts.as_slice().iter().zip(bin.as_slice()) {
            assert_eq!(*b, if *x > 0.0 { 1.0 } else { 0.0 });
        }
    }
}
