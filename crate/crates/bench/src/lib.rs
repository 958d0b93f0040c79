//! Shared fixtures for the criterion benchmarks.

use dnmf_core::numerics::{derive_seed, seeded_uniform_fill, DenseMatrix, SparseMatrix};

/// A `words × docs` problem with `topics` planted clusters.
pub struct Fixture {
    pub d: SparseMatrix,
    pub f: DenseMatrix,
    pub c: DenseMatrix,
    pub w: DenseMatrix,
    /// sdnmf scaling, `topics × docs`.
    pub t: DenseMatrix,
    /// cdnmf transform, `topics × topics`.
    pub t_square: DenseMatrix,
}

impl Fixture {
    /// Roughly `density` of the entries of `D` are nonzero; document `j`
    /// belongs to cluster `j % topics`.
    pub fn new(words: usize, docs: usize, topics: usize, density: f64, seed: u64) -> Fixture {
        let fill = |r, c, k| seeded_uniform_fill(r, c, derive_seed(seed, &[k]), 1e-3, 1.0).unwrap();
        let mask = fill(words, docs, 0);
        let values = fill(words, docs, 1);
        let dense = DenseMatrix::from_fn(words, docs, |i, j| {
            if mask[(i, j)] < density {
                values[(i, j)]
            } else {
                0.0
            }
        });
        Fixture {
            d: SparseMatrix::from_dense(&dense).unwrap(),
            f: DenseMatrix::from_fn(topics, docs, |r, j| if j % topics == r { 1.0 } else { 0.0 }),
            c: fill(words, topics, 2),
            w: fill(topics, docs, 3),
            t: fill(topics, docs, 4),
            t_square: fill(topics, topics, 5),
        }
    }
}

/// Square `n × n` integer weight matrix for the assignment solver.
pub fn assignment_weights(n: usize, seed: u64) -> Vec<Vec<i64>> {
    let m = seeded_uniform_fill(n, n, seed, 1e-3, 1.0).unwrap();
    (0..n)
        .map(|i| (0..n).map(|j| (m[(i, j)] * 1000.0) as i64).collect())
        .collect()
}
