use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::Representation;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, stream, DenseMatrix};

const KMEANS_RESTARTS: usize = 10;
const KMEANS_ATTEMPTS: usize = 5;
const KMEANS_MAX_ITER: usize = 300;

/// Hard assignment of documents to `k` clusters, i.e. the one-hot `k × N`
/// document-topic indicator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterIndicator {
    k: usize,
    labels: Vec<usize>,
}

impl ClusterIndicator {
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::invalid(format!("cluster label {bad} >= k = {k}")));
        }
        Ok(ClusterIndicator { k, labels })
    }

    /// Reads a `k × N` indicator matrix; every column must be one-hot.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let mut labels = Vec::with_capacity(m.cols());
        for j in 0..m.cols() {
            let col = m.column(j);
            let ones: Vec<usize> = (0..col.len()).filter(|&i| col[i] == 1.0).collect();
            let zeros = col.iter().filter(|&&v| v == 0.0).count();
            if ones.len() != 1 || zeros + 1 != col.len() {
                return Err(Error::invalid(format!(
                    "indicator column {j} is not one-hot"
                )));
            }
            labels.push(ones[0]);
        }
        Self::new(m.rows(), labels)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_docs(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.k, self.labels.len());
        for (j, &l) in self.labels.iter().enumerate() {
            m[(l, j)] = 1.0;
        }
        m
    }

    /// Cluster ids that received no document.
    pub fn empty_clusters(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        (0..self.k).filter(|&c| sizes[c] == 0).collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct KMeansFit {
    labels: Vec<usize>,
    inertia: f64,
    has_empty: bool,
}

/// Lloyd iterations from a greedy farthest-point start whose first centre is
/// drawn from `seed`. Points are rows of a row-major `n × dim` slice.
fn kmeans_once(points: &[f64], n: usize, dim: usize, k: usize, seed: u64) -> KMeansFit {
    let point = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut rng = stream(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut min_d: Vec<f64> = (0..n)
        .map(|i| sq_dist(point(i), point(chosen[0])))
        .collect();
    while chosen.len() < k {
        let mut far = 0;
        for i in 1..n {
            if min_d[i] > min_d[far] {
                far = i;
            }
        }
        chosen.push(far);
        for i in 0..n {
            min_d[i] = min_d[i].min(sq_dist(point(i), point(far)));
        }
    }
    let mut centers: Vec<f64> = chosen.iter().flat_map(|&c| point(c).to_vec()).collect();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(point(i), &centers[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            for (s, &x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            // An emptied cluster keeps its previous centre.
            if counts[c] > 0 {
                for d in 0..dim {
                    centers[c * dim + d] = sums[c * dim + d] / counts[c] as f64;
                }
            }
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(point(i), &centers[labels[i] * dim..(labels[i] + 1) * dim]))
        .sum();
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    KMeansFit {
        labels,
        inertia,
        has_empty: sizes.contains(&0),
    }
}

/// Seeded k-means with farthest-point initialisation and
/// [`KMEANS_RESTARTS`] restarts, keeping the lowest within-cluster sum of
/// squares. A best fit with an empty cluster triggers a fresh round of
/// restarts under a new seed offset, up to [`KMEANS_ATTEMPTS`] rounds.
pub fn kmeans(points: &[f64], n: usize, dim: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "k-means needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    for attempt in 0..KMEANS_ATTEMPTS {
        let mut best: Option<KMeansFit> = None;
        for restart in 0..KMEANS_RESTARTS {
            let fit = kmeans_once(
                points,
                n,
                dim,
                k,
                derive_seed(seed, &[attempt as u64, restart as u64]),
            );
            if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
                best = Some(fit);
            }
        }
        let best = best.expect("at least one restart");
        if !best.has_empty {
            return Ok(best.labels);
        }
    }
    Err(Error::EmptyCluster {
        attempts: KMEANS_ATTEMPTS,
    })
}

/// Spectral clustering of a row-major `n × n` nonnegative affinity matrix
/// using the symmetric normalized affinity `D^{-1/2} A D^{-1/2}`.
pub fn spectral_cluster_affinity(
    affinity: &[f64],
    n: usize,
    k: usize,
    seed: u64,
) -> Result<ClusterIndicator> {
    if affinity.len() != n * n {
        return Err(Error::invalid("affinity must be n x n"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "need 1 <= K <= N, got K = {k}, N = {n}"
        )));
    }
    if k == 1 {
        return ClusterIndicator::new(1, vec![0; n]);
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = affinity[i * n..(i + 1) * n].iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        // Average with the mirror entry so the input is exactly symmetric.
        let a = 0.5 * (affinity[i * n + j] + affinity[j * n + i]);
        inv_sqrt[i] * a * inv_sqrt[j]
    });
    let eig = SymmetricEigen::try_new(m, 1e-13, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigen-solver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite")
            .then(a.cmp(&b))
    });
    let mut embedding = vec![0.0; n * k];
    for i in 0..n {
        let row = &mut embedding[i * k..(i + 1) * k];
        for (c, &e) in order[..k].iter().enumerate() {
            row[c] = eig.eigenvectors[(i, e)];
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    let labels = kmeans(&embedding, n, k, k, seed)?;
    ClusterIndicator::new(k, labels)
}

/// Linear-kernel spectral clustering: columns are scaled to unit length, the
/// affinity is their cosine Gram matrix.
pub fn spectral_cluster(x: &Representation, k: usize, seed: u64) -> Result<ClusterIndicator> {
    let n = x.n_docs();
    spectral_cluster_affinity(&x.cosine_gram(), n, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(sizes: &[usize], dim_per_block: usize) -> DenseMatrix {
        let n: usize = sizes.iter().sum();
        let mut m = DenseMatrix::zeros(sizes.len() * dim_per_block, n);
        let mut j = 0;
        for (b, &s) in sizes.iter().enumerate() {
            for t in 0..s {
                for d in 0..dim_per_block {
                    m[(b * dim_per_block + d, j)] = 1.0 + ((t * 7 + d * 3) % 5) as f64;
                }
                j += 1;
            }
        }
        m
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn recovers_three_blocks() {
        let m = blocks(&[5, 7, 6], 4);
        let truth: Vec<usize> = [0; 5].into_iter().chain([1; 7]).chain([2; 6]).collect();
        let ind = spectral_cluster(&Representation::Dense(m), 3, 11).unwrap();
        assert!(same_partition(ind.labels(), &truth));
        assert!(ind.empty_clusters().is_empty());
    }

    #[test]
    fn single_cluster() {
        let m = blocks(&[3, 3], 2);
        let ind = spectral_cluster(&Representation::Dense(m), 1, 0).unwrap();
        assert_eq!(ind.labels(), &[0; 6]);
    }

    #[test]
    fn duplicates_share_labels() {
        let mut m = blocks(&[4, 4], 3);
        for i in 0..m.rows() {
            m[(i, 7)] = m[(i, 1)];
        }
        let ind = spectral_cluster(&Representation::Dense(m), 2, 5).unwrap();
        assert_eq!(ind.labels()[7], ind.labels()[1]);
    }

    #[test]
    fn too_few_distinct_points_errors() {
        let points = vec![0.5; 5 * 3];
        assert!(matches!(
            kmeans(&points, 5, 3, 2, 0),
            Err(Error::EmptyCluster { .. })
        ));
    }

    #[test]
    fn indicator_round_trip() {
        let ind = ClusterIndicator::new(3, vec![2, 0, 0, 1]).unwrap();
        assert_eq!(ClusterIndicator::from_dense(&ind.to_dense()).unwrap(), ind);
        let bad = DenseMatrix::from_rows(&[[1.0, 0.5], [0.0, 0.5]]);
        assert!(ClusterIndicator::from_dense(&bad).is_err());
        assert!(ClusterIndicator::new(2, vec![2]).is_err());
        assert_eq!(
            ClusterIndicator::new(3, vec![0, 0])
                .unwrap()
                .empty_clusters(),
            [1, 2]
        );
    }
}
