use std::fmt;
use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Denominator floor added inside every multiplicative-update quotient.
pub const EPS_DIV: f64 = 1e-12;

/// Kernels with less work than this (in multiply-adds) run on one thread.
pub(crate) const PAR_WORK: usize = 1 << 16;

/// `f(0..n)` collected in index order, in parallel when `n · work_per_item`
/// is large enough to pay for it.
pub(crate) fn map_indexed<F>(n: usize, work_per_item: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n.saturating_mul(work_per_item) >= PAR_WORK {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Runs `f(i, chunk)` over consecutive `width`-sized chunks of `data`.
pub(crate) fn for_each_chunk<F>(data: &mut [f64], width: usize, work_per_chunk: usize, f: F)
where
    F: Fn((usize, &mut [f64])) + Sync + Send,
{
    let n = data.len() / width.max(1);
    if n.saturating_mul(work_per_chunk) >= PAR_WORK {
        data.par_chunks_mut(width).enumerate().for_each(f);
    } else {
        data.chunks_mut(width).enumerate().for_each(f);
    }
}

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; meant for
    /// literals in tests and fixtures.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out.data[j * self.rows + i] = v;
            }
        }
        out
    }

    /// Matrix product `self * other`.
    ///
    /// Each output entry is accumulated over the inner index in ascending
    /// order whatever the thread count, so results are reproducible.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, m) = (self.rows, other.cols);
        let mut out = DenseMatrix::zeros(n, m);
        if m == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [f64])| {
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(p)) {
                    *o += a * b;
                }
            }
        };
        for_each_chunk(&mut out.data, m, m * self.cols, kernel);
        Ok(out)
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::Shape {
                op: "tr_matmul",
                left: (self.cols, self.rows),
                right: other.shape(),
            });
        }
        self.transpose().matmul(other)
    }

    /// `self * otherᵀ`.
    pub fn matmul_tr(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::Shape {
                op: "matmul_tr",
                left: self.shape(),
                right: (other.cols, other.rows),
            });
        }
        self.matmul(&other.transpose())
    }

    fn check_same(&self, other: &DenseMatrix, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    fn zip_map(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same(other, "hadamard")?;
        Ok(self.zip_map(other, |a, b| a * b))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same(other, "add")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same(other, "sub")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseMatrix) -> Result<()> {
        self.check_same(other, "add_scaled")?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        self.map(|v| v * alpha)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sum of squared entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `Σ self ⊙ other`, i.e. `trace(selfᵀ other)`.
    pub fn dot(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same(other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn trace(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::invalid(format!(
                "trace of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Scales every column to sum one. All-zero columns are left untouched.
    pub fn normalize_columns_l1(&self) -> DenseMatrix {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, &s) in out.row_mut(i).iter_mut().zip(&sums) {
                if s > 0.0 {
                    *v /= s;
                }
            }
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// Errors on the first negative or NaN entry.
    pub fn check_nonnegative(&self, name: &'static str) -> Result<()> {
        match self.data.iter().position(|v| !(*v >= 0.0)) {
            None => Ok(()),
            Some(p) => Err(Error::Negative {
                name,
                row: p / self.cols,
                col: p % self.cols,
                value: self.data[p],
            }),
        }
    }

    /// Index of the largest entry of each column; ties go to the lowest row.
    pub fn argmax_columns(&self) -> Vec<usize> {
        let mut best = vec![0usize; self.cols];
        let mut best_val = vec![f64::NEG_INFINITY; self.cols];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v > best_val[j] {
                    best_val[j] = v;
                    best[j] = i;
                }
            }
        }
        best
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Multiplicative update `x ⊙ numer / (denom + EPS_DIV)`.
///
/// Zero entries of `x` stay zero.
pub fn multiplicative_update(
    x: &DenseMatrix,
    numer: &DenseMatrix,
    denom: &DenseMatrix,
) -> Result<DenseMatrix> {
    x.check_same(numer, "multiplicative_update")?;
    x.check_same(denom, "multiplicative_update")?;
    let data = x
        .data
        .iter()
        .zip(&numer.data)
        .zip(&denom.data)
        .map(|((&x, &n), &d)| x * (n / (d + EPS_DIV)))
        .collect();
    Ok(DenseMatrix {
        rows: x.rows,
        cols: x.cols,
        data,
    })
}

/// Free-function form of [`DenseMatrix::hadamard`].
pub fn hadamard(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.hadamard(b)
}

/// Free-function form of [`DenseMatrix::frobenius_sq`].
pub fn frobenius_sq(a: &DenseMatrix) -> f64 {
    a.frobenius_sq()
}
