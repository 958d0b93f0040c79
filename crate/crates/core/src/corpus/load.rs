use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mtx, SparseMatrix};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// One JSON object per line with `id`, `text` and optional `label`.
    Jsonl,
    /// `<root>/<class>/<docid>.txt`.
    DirPerClass,
    /// `matrix.mtx` (word × document counts) plus `vocab.txt` and an
    /// optional `labels.txt` in the same directory.
    MatrixMarket,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "dir-per-class" | "dir" => Ok(CorpusFormat::DirPerClass),
            "matrixmarket" | "mtx" => Ok(CorpusFormat::MatrixMarket),
            other => Err(Error::invalid(format!(
                "unknown corpus format {other:?} (expected jsonl, dir-per-class or matrixmarket)"
            ))),
        }
    }
}

/// A tokenized document.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Option<String>,
}

/// Lowercases, splits on anything that is not alphanumeric and drops tokens
/// shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

/// Parses JSONL text; documents are returned sorted by id.
pub fn parse_jsonl(text: &str, origin: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(origin, i + 1, format!("malformed JSON: {e}")))?;
        docs.push(Document {
            id: rec.id,
            tokens: tokenize(&rec.text),
            label: rec.label,
        });
    }
    finish(docs)
}

fn finish(mut docs: Vec<Document>) -> Result<Vec<Document>> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = docs.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::invalid(format!(
            "duplicate document id {:?}",
            w[0].id
        )));
    }
    Ok(docs)
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn load_dir_per_class(root: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for class_dir in read_dir_sorted(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let class = class_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for file in read_dir_sorted(&class_dir)? {
            if file.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let stem = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            docs.push(Document {
                // The class prefix keeps ids unique across classes.
                id: format!("{class}/{stem}"),
                tokens: tokenize(&text),
                label: Some(class.clone()),
            });
        }
    }
    finish(docs)
}

/// Raw input as read from disk: either tokenized documents or a prebuilt
/// count matrix with its vocabulary.
#[derive(Debug, Clone)]
pub enum RawCorpus {
    Documents(Vec<Document>),
    Counts {
        counts: SparseMatrix,
        vocab: Vec<String>,
        ids: Vec<String>,
        labels: Option<Vec<String>>,
    },
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}

fn load_matrix_market(path: &Path) -> Result<RawCorpus> {
    let (matrix_path, dir) = if path.is_dir() {
        (path.join("matrix.mtx"), path.to_path_buf())
    } else {
        (
            path.to_path_buf(),
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        )
    };
    let counts = mtx::read(&matrix_path)?;
    let vocab_path = dir.join("vocab.txt");
    let mut vocab = read_lines(&vocab_path)?;
    while vocab.last().is_some_and(String::is_empty) {
        vocab.pop();
    }
    if vocab.len() != counts.rows() {
        return Err(Error::invalid(format!(
            "{}: {} words but matrix has {} rows",
            vocab_path.display(),
            vocab.len(),
            counts.rows()
        )));
    }
    let labels_path = dir.join("labels.txt");
    let labels = if labels_path.exists() {
        let mut labels = read_lines(&labels_path)?;
        while labels.last().is_some_and(String::is_empty) {
            labels.pop();
        }
        if labels.len() != counts.cols() {
            return Err(Error::invalid(format!(
                "{}: {} labels but matrix has {} columns",
                labels_path.display(),
                labels.len(),
                counts.cols()
            )));
        }
        Some(labels)
    } else {
        None
    };
    if counts.cols() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let width = (counts.cols() - 1).to_string().len();
    let ids = (0..counts.cols()).map(|j| format!("{j:0width$}")).collect();
    Ok(RawCorpus::Counts {
        counts,
        vocab,
        ids,
        labels,
    })
}

/// Reads a corpus in the given format.
pub fn load_raw(path: impl AsRef<Path>, format: CorpusFormat) -> Result<RawCorpus> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus path does not exist"),
        ));
    }
    match format {
        CorpusFormat::Jsonl => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(RawCorpus::Documents(parse_jsonl(&text, path)?))
        }
        CorpusFormat::DirPerClass => Ok(RawCorpus::Documents(load_dir_per_class(path)?)),
        CorpusFormat::MatrixMarket => load_matrix_market(path),
    }
}
