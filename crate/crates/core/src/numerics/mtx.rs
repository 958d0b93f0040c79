//! MatrixMarket coordinate format, 1-based indices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

pub const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Parses MatrixMarket coordinate text. `real` and `integer` fields are
/// accepted, as is `pattern` (every listed entry becomes 1.0).
pub fn parse(text: &str, origin: &Path) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty MatrixMarket file"))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if fields.len() != 5
        || fields[0] != "%%matrixmarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[4] != "general"
    {
        return Err(Error::parse(
            origin,
            1,
            format!("unsupported header {header:?}; expected {HEADER:?}"),
        ));
    }
    let pattern = match fields[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => {
            return Err(Error::parse(
                origin,
                1,
                format!("unsupported field {other:?}"),
            ));
        }
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lineno = lineno + 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(origin, lineno, format!("bad integer {s:?}")))
        };
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(Error::parse(origin, lineno, "expected `rows cols nnz`"));
                }
                let s = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                triplets.reserve(s.2);
                size = Some(s);
            }
            Some((rows, cols, _)) => {
                let want = if pattern { 2 } else { 3 };
                if parts.len() != want {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("expected {want} fields, got {}", parts.len()),
                    ));
                }
                let (i, j) = (num(parts[0])?, num(parts[1])?);
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
                    ));
                }
                let v = if pattern {
                    1.0
                } else {
                    parts[2].parse::<f64>().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad value {:?}", parts[2]))
                    })?
                };
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| Error::parse(origin, 1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(Error::parse(
            origin,
            1,
            format!("size line declares {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
        .map_err(|e| Error::parse(origin, 1, e.to_string()))
}

pub fn read(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

fn render(rows: usize, cols: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> String {
    let entries: Vec<_> = entries.collect();
    let mut out = String::with_capacity(64 + entries.len() * 24);
    out.push_str(HEADER);
    out.push('\n');
    let _ = writeln!(out, "{rows} {cols} {}", entries.len());
    for (i, j, v) in entries {
        // `{:e}`-free Display gives the shortest round-trip representation.
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
    }
    out
}

/// Column-major coordinate text of a sparse matrix.
pub fn to_string_sparse(m: &SparseMatrix) -> String {
    render(m.rows(), m.cols(), m.triplets())
}

/// Coordinate text of the nonzero entries of a dense matrix, column-major.
pub fn to_string_dense(m: &DenseMatrix) -> String {
    let entries = (0..m.cols()).flat_map(|j| {
        (0..m.rows()).filter_map(move |i| {
            let v = m[(i, j)];
            (v != 0.0).then_some((i, j, v))
        })
    });
    render(m.rows(), m.cols(), entries)
}

pub fn write_sparse(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string_sparse(m)).map_err(|e| Error::io(path, e))
}

pub fn write_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string_dense(m)).map_err(|e| Error::io(path, e))
}

/// Reads a coordinate file into a dense matrix. Negative values are allowed
/// here since factor files are only checked for nonnegativity by the solver.
pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    Ok(read(path)?.to_dense())
}
