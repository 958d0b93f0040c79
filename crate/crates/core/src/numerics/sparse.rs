use super::dense::{for_each_chunk, DenseMatrix};
use crate::error::{Error, Result};

/// Nonnegative sparse matrix stored in both column- and row-compressed form.
///
/// Explicit zeros are dropped on construction; coordinates are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    // column-compressed
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    // row-compressed
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Zero values are dropped;
    /// negative values, out-of-range indices and duplicate coordinates are
    /// rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) out of bounds for {rows}x{cols}"
                )));
            }
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) = {v} is not a finite nonnegative value"
                )));
            }
            if v > 0.0 {
                entries.push((i, j, v));
            }
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (j, i));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::invalid(format!(
                "duplicate coordinate ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut col_ptr = vec![0usize; cols + 1];
        for &(_, j, _) in &entries {
            col_ptr[j + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let col_rows = entries.iter().map(|e| e.0).collect();
        let col_vals = entries.iter().map(|e| e.2).collect();

        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &entries {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let row_cols = entries.iter().map(|e| e.1).collect();
        let row_vals = entries.iter().map(|e| e.2).collect();

        Ok(SparseMatrix {
            rows,
            cols,
            col_ptr,
            col_rows,
            col_vals,
            row_ptr,
            row_cols,
            row_vals,
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.col_vals.len()
    }

    /// Row indices and values of column `j`, rows ascending.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.col_rows[r.clone()], &self.col_vals[r])
    }

    /// Column indices and values of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.row_cols[r.clone()], &self.row_vals[r])
    }

    /// Triplets in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).map_or(0.0, |p| vals[p])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            col_ptr: self.row_ptr.clone(),
            col_rows: self.row_cols.clone(),
            col_vals: self.row_vals.clone(),
            row_ptr: self.col_ptr.clone(),
            row_cols: self.col_rows.clone(),
            row_vals: self.col_vals.clone(),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.col_vals.iter().map(|v| v * v).sum()
    }

    /// L2 norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.col(j).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Keeps only the listed rows, renumbered in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseMatrix {
        let t = keep.iter().enumerate().flat_map(|(new, &old)| {
            let (cols, vals) = self.row(old);
            cols.iter().zip(vals).map(move |(&j, &v)| (new, j, v))
        });
        SparseMatrix::from_triplets(keep.len(), self.cols, t)
            .expect("row selection of a valid matrix is valid")
    }

    /// Keeps only the listed columns, renumbered in the given order.
    pub fn select_cols(&self, keep: &[usize]) -> SparseMatrix {
        let t = keep.iter().enumerate().flat_map(|(new, &old)| {
            let (rows, vals) = self.col(old);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, new, v))
        });
        SparseMatrix::from_triplets(self.rows, keep.len(), t)
            .expect("column selection of a valid matrix is valid")
    }

    /// `self * x` for dense `x` (rows × k). Parallel over output rows; each
    /// entry accumulates in ascending column order.
    pub fn matmul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != x.rows() {
            return Err(Error::Shape {
                op: "sparse matmul",
                left: self.shape(),
                right: x.shape(),
            });
        }
        let k = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, k);
        if k == 0 {
            return Ok(out);
        }
        let work = k * (self.nnz() / self.rows.max(1) + 1);
        for_each_chunk(out.as_mut_slice(), k, work, |(i, out_row)| {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                for (o, &b) in out_row.iter_mut().zip(x.row(j)) {
                    *o += v * b;
                }
            }
        });
        Ok(out)
    }

    /// `aᵀ * self` for dense `a` (rows × k), giving k × cols.
    pub fn left_tr_matmul(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.rows {
            return Err(Error::Shape {
                op: "sparse left_tr_matmul",
                left: (a.cols(), a.rows()),
                right: self.shape(),
            });
        }
        let k = a.cols();
        // Build the transposed result (cols × k) row by row, then flip.
        let mut out_t = DenseMatrix::zeros(self.cols, k);
        if k > 0 {
            let work = k * (self.nnz() / self.cols.max(1) + 1);
            for_each_chunk(out_t.as_mut_slice(), k, work, |(j, out_row)| {
                let (rows, vals) = self.col(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    for (o, &c) in out_row.iter_mut().zip(a.row(i)) {
                        *o += c * v;
                    }
                }
            });
        }
        Ok(out_t.transpose())
    }

    /// `self * selfᵀ` row `i` as a dense vector of length `rows`.
    pub fn gram_row(&self, i: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let (cols, vals) = self.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let (rows, cvals) = self.col(j);
            for (&r, &w) in rows.iter().zip(cvals) {
                out[r] += v * w;
            }
        }
    }
}

/// Product of either a sparse or dense left operand with a dense right one.
pub trait MatMul {
    fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix>;
}

impl MatMul for DenseMatrix {
    fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        DenseMatrix::matmul(self, rhs)
    }
}

impl MatMul for SparseMatrix {
    fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.matmul_dense(rhs)
    }
}

/// `a * b` for a sparse or dense `a`.
pub fn matmul<A: MatMul + ?Sized>(a: &A, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.matmul(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            4,
            vec![
                (0, 0, 1.0),
                (2, 0, 2.0),
                (1, 1, 3.0),
                (0, 3, 4.0),
                (2, 3, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn drops_explicit_zeros() {
        assert_eq!(sample().nnz(), 4);
        assert_eq!(sample().get(2, 3), 0.0);
    }

    #[test]
    fn rejects_duplicates_and_negatives() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, -1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn products_match_dense() {
        let s = sample();
        let d = s.to_dense();
        let x = DenseMatrix::from_fn(4, 2, |i, j| 0.5 + i as f64 - j as f64 * 0.25);
        assert_eq!(s.matmul_dense(&x).unwrap(), d.matmul(&x).unwrap());
        let a = DenseMatrix::from_fn(3, 2, |i, j| 1.0 + (i * 2 + j) as f64);
        assert_eq!(
            s.left_tr_matmul(&a).unwrap(),
            a.transpose().matmul(&d).unwrap()
        );
        assert!(s.matmul_dense(&DenseMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn gram_row_matches_dense() {
        let s = sample();
        let g = s.to_dense().matmul_tr(&s.to_dense()).unwrap();
        let mut row = vec![0.0; 3];
        for i in 0..3 {
            s.gram_row(i, &mut row);
            assert_eq!(row.as_slice(), g.row(i));
        }
    }

    #[test]
    fn transpose_and_selection() {
        let s = sample();
        assert_eq!(s.transpose().to_dense(), s.to_dense().transpose());
        let r = s.select_rows(&[2, 0]);
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(1, 3), 4.0);
        let c = s.select_cols(&[3]);
        assert_eq!(c.shape(), (3, 1));
        assert_eq!(c.get(0, 0), 4.0);
    }
}
