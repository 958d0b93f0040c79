use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derive_seed, stream, DenseMatrix, SparseMatrix};

/// Concatenated one-hot outputs of `clusterings` clusterings of `width`
/// clusters each. Stored as one cluster id per (document, clustering).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotCode {
    n_docs: usize,
    clusterings: usize,
    width: usize,
    codes: Vec<u32>,
}

impl OneHotCode {
    pub fn new(n_docs: usize, clusterings: usize, width: usize, codes: Vec<u32>) -> Result<Self> {
        if codes.len() != n_docs * clusterings {
            return Err(Error::invalid("one-hot code length mismatch"));
        }
        if codes.iter().any(|&c| c as usize >= width) {
            return Err(Error::invalid("cluster id outside layer width"));
        }
        Ok(OneHotCode {
            n_docs,
            clusterings,
            width,
            codes,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn clusterings(&self) -> usize {
        self.clusterings
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Cluster ids of document `j`, one per clustering.
    pub fn doc(&self, j: usize) -> &[u32] {
        &self.codes[j * self.clusterings..(j + 1) * self.clusterings]
    }

    /// Output dimension `clusterings · width`.
    pub fn dim(&self) -> usize {
        self.clusterings * self.width
    }

    /// Explicit `(clusterings·width) × N` 0/1 matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim(), self.n_docs);
        for j in 0..self.n_docs {
            for (c, &id) in self.doc(j).iter().enumerate() {
                m[(c * self.width + id as usize, j)] = 1.0;
            }
        }
        m
    }
}

/// Input to a layer, as columns (one per document).
#[derive(Debug, Clone)]
pub enum Representation {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
    OneHot(OneHotCode),
}

fn unit_columns_dense(m: &DenseMatrix) -> DenseMatrix {
    let mut t = m.transpose();
    for j in 0..t.rows() {
        let row = t.row_mut(j);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    t
}

impl Representation {
    pub fn n_docs(&self) -> usize {
        match self {
            Representation::Sparse(m) => m.cols(),
            Representation::Dense(m) => m.cols(),
            Representation::OneHot(c) => c.n_docs(),
        }
    }

    /// Row-major N × N matrix of pairwise cosine similarities. A zero column
    /// has cosine 0 with everything, itself included.
    pub fn cosine_gram(&self) -> Vec<f64> {
        let n = self.n_docs();
        let mut gram = vec![0.0; n * n];
        if n == 0 {
            return gram;
        }
        match self {
            Representation::Sparse(m) => {
                let norms = m.column_norms();
                let unit = SparseMatrix::from_triplets(
                    m.cols(),
                    m.rows(),
                    m.triplets().map(|(i, j, v)| (j, i, v / norms[j])),
                )
                .expect("normalized copy of a valid matrix");
                gram.par_chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| unit.gram_row(i, row));
            }
            Representation::Dense(m) => {
                let unit = unit_columns_dense(m);
                gram.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                    let a = unit.row(i);
                    for (j, g) in row.iter_mut().enumerate() {
                        *g = a.iter().zip(unit.row(j)).map(|(x, y)| x * y).sum();
                    }
                });
            }
            Representation::OneHot(code) => {
                let m = code.clusterings() as f64;
                gram.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                    let a = code.doc(i);
                    for (j, g) in row.iter_mut().enumerate() {
                        let same = a.iter().zip(code.doc(j)).filter(|(x, y)| x == y).count();
                        *g = same as f64 / m;
                    }
                });
            }
        }
        gram
    }
}

/// Centroid document indices of every clustering in one layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub width: usize,
    pub centroids: Vec<Vec<usize>>,
}

/// Assigns every document to its most cosine-similar centroid; ties go to the
/// lowest centroid position.
fn assign(gram: &[f64], n: usize, centroids: &[usize], out: &mut [u32]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let row = &gram[i * n..(i + 1) * n];
        let mut best = 0usize;
        let mut best_sim = f64::NEG_INFINITY;
        for (c, &doc) in centroids.iter().enumerate() {
            if row[doc] > best_sim {
                best_sim = row[doc];
                best = c;
            }
        }
        *slot = best as u32;
    }
}

fn encode(gram: &[f64], n: usize, layer: &Layer) -> Result<OneHotCode> {
    let m = layer.centroids.len();
    let per_clustering: Vec<Vec<u32>> = layer
        .centroids
        .par_iter()
        .map(|cents| {
            let mut ids = vec![0u32; n];
            assign(gram, n, cents, &mut ids);
            ids
        })
        .collect();
    let mut codes = vec![0u32; n * m];
    for (c, ids) in per_clustering.iter().enumerate() {
        for (j, &id) in ids.iter().enumerate() {
            codes[j * m + c] = id;
        }
    }
    OneHotCode::new(n, m, layer.width, codes)
}

/// Trains one layer of `clusterings` random-centroid clusterings of width `k`.
///
/// Clustering `c` samples its `k` distinct centroid documents from a stream
/// keyed by `(seed, layer_index, c)`, so the result does not depend on how
/// clusterings are scheduled across threads.
pub fn train_layer(
    input: &Representation,
    k: usize,
    clusterings: usize,
    seed: u64,
    layer_index: usize,
) -> Result<(Layer, OneHotCode)> {
    let n = input.n_docs();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "layer width {k} must lie in 1..={n} (number of documents)"
        )));
    }
    if clusterings == 0 {
        return Err(Error::invalid(
            "at least one clustering per layer is required",
        ));
    }
    let centroids: Vec<Vec<usize>> = (0..clusterings)
        .map(|c| {
            let mut rng = stream(derive_seed(seed, &[layer_index as u64, c as u64]));
            index::sample(&mut rng, n, k).into_vec()
        })
        .collect();
    let layer = Layer {
        width: k,
        centroids,
    };
    let gram = input.cosine_gram();
    let code = encode(&gram, n, &layer)?;
    Ok((layer, code))
}

/// Re-encodes `input` with previously sampled centroids.
pub fn apply_layer(input: &Representation, layer: &Layer) -> Result<OneHotCode> {
    let n = input.n_docs();
    if layer.centroids.iter().flatten().any(|&d| d >= n) {
        return Err(Error::invalid(
            "layer centroid index exceeds document count",
        ));
    }
    let gram = input.cosine_gram();
    encode(&gram, n, layer)
}
