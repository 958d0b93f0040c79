use std::sync::OnceLock;

use super::config::Algo;
use crate::error::{Error, Result};
use crate::numerics::dense::map_indexed;
use crate::numerics::{DenseMatrix, SparseMatrix};

/// Vocabularies up to this size evaluate the affinity penalty entry by entry;
/// larger ones use the trace expansion with a cached constant.
const AFFINITY_DIRECT_MAX_WORDS: usize = 4096;

/// `‖D − CW‖²_F`, streamed one document at a time.
pub fn reconstruction_error(d: &SparseMatrix, c: &DenseMatrix, w: &DenseMatrix) -> Result<f64> {
    if c.cols() != w.rows() || c.rows() != d.rows() || w.cols() != d.cols() {
        return Err(Error::Shape {
            op: "reconstruction_error",
            left: (c.rows(), w.cols()),
            right: d.shape(),
        });
    }
    let wt = w.transpose();
    let v = d.rows();
    let per_doc = map_indexed(d.cols(), v * c.cols(), |j| {
        let wj = wt.row(j);
        let mut col: Vec<f64> = (0..v)
            .map(|i| c.row(i).iter().zip(wj).map(|(a, b)| a * b).sum())
            .collect();
        let (rows, vals) = d.col(j);
        for (&i, &x) in rows.iter().zip(vals) {
            col[i] -= x;
        }
        col.iter().map(|r| r * r).sum()
    });
    Ok(per_doc.iter().sum())
}

/// Word-word affinity penalty `‖CCᵀ − DDᵀ‖²_F`.
///
/// Holds the constant `‖DDᵀ‖²_F` for large vocabularies, where the penalty is
/// evaluated as `‖CᵀC‖² − 2‖DᵀC‖² + ‖DDᵀ‖²` to avoid V × V intermediates.
#[derive(Debug)]
pub struct AffinityPenalty<'a> {
    d: &'a SparseMatrix,
    ddt_norm_sq: OnceLock<f64>,
}

impl<'a> AffinityPenalty<'a> {
    pub fn new(d: &'a SparseMatrix) -> Self {
        AffinityPenalty {
            d,
            ddt_norm_sq: OnceLock::new(),
        }
    }

    /// `‖DDᵀ‖²_F = ‖DᵀD‖²_F`, computed once.
    pub fn ddt_norm_sq(&self) -> f64 {
        *self.ddt_norm_sq.get_or_init(|| {
            let dt = self.d.transpose();
            let n = dt.rows();
            let rows = map_indexed(n, n * (self.d.nnz() / n.max(1) + 1), |j| {
                let mut g = vec![0.0; n];
                dt.gram_row(j, &mut g);
                g.iter().map(|x| x * x).sum()
            });
            rows.iter().sum()
        })
    }

    pub fn eval(&self, c: &DenseMatrix) -> Result<f64> {
        let d = self.d;
        if c.rows() != d.rows() {
            return Err(Error::Shape {
                op: "affinity penalty",
                left: c.shape(),
                right: d.shape(),
            });
        }
        let v = d.rows();
        if v <= AFFINITY_DIRECT_MAX_WORDS {
            let per_row = map_indexed(v, v * c.cols(), |i| {
                let mut ddt = vec![0.0; v];
                d.gram_row(i, &mut ddt);
                let ci = c.row(i);
                (0..v)
                    .map(|r| {
                        let cct: f64 = ci.iter().zip(c.row(r)).map(|(a, b)| a * b).sum();
                        let diff = cct - ddt[r];
                        diff * diff
                    })
                    .sum()
            });
            Ok(per_row.iter().sum())
        } else {
            let ctc = c.tr_matmul(c)?;
            let dtc = d.left_tr_matmul(c)?;
            Ok((ctc.frobenius_sq() - 2.0 * dtc.frobenius_sq() + self.ddt_norm_sq()).max(0.0))
        }
    }
}

/// Objective split into its terms; `total` is what the solver minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub reconstruction: f64,
    pub regression: f64,
    pub affinity: f64,
    pub total: f64,
}

/// Factor matrices for one objective evaluation. Which ones are required
/// depends on the algorithm: `w` for nmf/cdnmf, `t` for sdnmf/cdnmf and the
/// indicator `f` for everything except nmf.
#[derive(Debug, Clone, Copy)]
pub struct FactorRefs<'a> {
    pub c: &'a DenseMatrix,
    pub w: Option<&'a DenseMatrix>,
    pub t: Option<&'a DenseMatrix>,
    pub f: Option<&'a DenseMatrix>,
}

fn require<'a>(m: Option<&'a DenseMatrix>, what: &str, algo: Algo) -> Result<&'a DenseMatrix> {
    m.ok_or_else(|| Error::invalid(format!("{algo} objective needs {what}")))
}

pub(crate) fn evaluate(
    algo: Algo,
    d: &SparseMatrix,
    x: FactorRefs<'_>,
    lambda1: f64,
    lambda2: f64,
    penalty: &AffinityPenalty<'_>,
) -> Result<ObjectiveTerms> {
    x.c.check_nonnegative("C")?;
    for (m, name) in [(x.w, "W"), (x.t, "T"), (x.f, "f(D)")] {
        if let Some(m) = m {
            m.check_nonnegative(name)?;
        }
    }
    let plain = |reconstruction: f64| ObjectiveTerms {
        reconstruction,
        regression: 0.0,
        affinity: 0.0,
        total: reconstruction,
    };
    match algo {
        Algo::Nmf => Ok(plain(reconstruction_error(
            d,
            x.c,
            require(x.w, "W", algo)?,
        )?)),
        Algo::Bdnmf => Ok(plain(reconstruction_error(
            d,
            x.c,
            require(x.f, "f(D)", algo)?,
        )?)),
        Algo::Sdnmf => {
            let w = require(x.f, "f(D)", algo)?.hadamard(require(x.t, "T", algo)?)?;
            Ok(plain(reconstruction_error(d, x.c, &w)?))
        }
        Algo::Cdnmf => {
            let w = require(x.w, "W", algo)?;
            let t = require(x.t, "T", algo)?;
            let f = require(x.f, "f(D)", algo)?;
            let reconstruction = reconstruction_error(d, x.c, w)?;
            let mut total = reconstruction;
            let regression = if lambda1 > 0.0 {
                let r = f.sub(&t.matmul(w)?)?.frobenius_sq();
                total += lambda1 * r;
                r
            } else {
                0.0
            };
            let affinity = if lambda2 > 0.0 {
                let a = penalty.eval(x.c)?;
                total += lambda2 * a;
                a
            } else {
                0.0
            };
            Ok(ObjectiveTerms {
                reconstruction,
                regression,
                affinity,
                total,
            })
        }
    }
}

/// Objective value of `algo` at the given factors.
///
/// * nmf: `‖D − CW‖²`
/// * bdnmf: `‖D − C·f(D)‖²`
/// * sdnmf: `‖D − C(f(D) ⊙ T)‖²`
/// * cdnmf: `‖D − CW‖² + λ₁‖f(D) − TW‖² + λ₂‖CCᵀ − DDᵀ‖²`
pub fn objective(
    algo: Algo,
    d: &SparseMatrix,
    factors: FactorRefs<'_>,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let penalty = AffinityPenalty::new(d);
    Ok(evaluate(algo, d, factors, lambda1, lambda2, &penalty)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_uniform_fill;

    fn eye_sparse(n: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0))).unwrap()
    }

    #[test]
    fn perfect_bdnmf_reconstruction() {
        let f = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let c = DenseMatrix::from_rows(&[[2.0, 0.0], [0.5, 3.0]]);
        let d = SparseMatrix::from_dense(&c.matmul(&f).unwrap()).unwrap();
        let x = FactorRefs {
            c: &c,
            w: None,
            t: None,
            f: Some(&f),
        };
        assert_eq!(objective(Algo::Bdnmf, &d, x, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_fixture_is_zero_for_cdnmf() {
        let d = eye_sparse(2);
        let i = DenseMatrix::identity(2);
        let x = FactorRefs {
            c: &i,
            w: Some(&i),
            t: Some(&i),
            f: Some(&i),
        };
        assert_eq!(objective(Algo::Cdnmf, &d, x, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn vanishing_weights_leave_reconstruction() {
        let c = seeded_uniform_fill(5, 2, 1, 1e-3, 1.0).unwrap();
        let w = seeded_uniform_fill(2, 4, 2, 1e-3, 1.0).unwrap();
        let t = seeded_uniform_fill(2, 2, 3, 1e-3, 1.0).unwrap();
        let f = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]);
        let d =
            SparseMatrix::from_dense(&seeded_uniform_fill(5, 4, 4, 1e-3, 1.0).unwrap()).unwrap();
        let x = FactorRefs {
            c: &c,
            w: Some(&w),
            t: Some(&t),
            f: Some(&f),
        };
        let plain = c
            .matmul(&w)
            .unwrap()
            .sub(&d.to_dense())
            .unwrap()
            .frobenius_sq();
        let got = objective(Algo::Cdnmf, &d, x, 0.0, 0.0).unwrap();
        assert!((got - plain).abs() <= 1e-12 * plain);
    }

    #[test]
    fn affinity_paths_agree() {
        let c = seeded_uniform_fill(6, 3, 5, 1e-3, 1.0).unwrap();
        let dd = seeded_uniform_fill(6, 4, 6, 1e-3, 1.0).unwrap();
        let d = SparseMatrix::from_dense(&dd).unwrap();
        let p = AffinityPenalty::new(&d);
        let direct = p.eval(&c).unwrap();
        let brute = c
            .matmul_tr(&c)
            .unwrap()
            .sub(&dd.matmul_tr(&dd).unwrap())
            .unwrap()
            .frobenius_sq();
        assert!((direct - brute).abs() <= 1e-10 * brute);
        let ctc = c.tr_matmul(&c).unwrap().frobenius_sq();
        let dtc = d.left_tr_matmul(&c).unwrap().frobenius_sq();
        let expanded = ctc - 2.0 * dtc + p.ddt_norm_sq();
        assert!((expanded - brute).abs() <= 1e-9 * brute);
    }

    #[test]
    fn negative_factor_is_rejected() {
        let d = eye_sparse(2);
        let c = DenseMatrix::from_rows(&[[1.0, -0.5], [0.0, 1.0]]);
        let i = DenseMatrix::identity(2);
        let x = FactorRefs {
            c: &c,
            w: Some(&i),
            t: None,
            f: None,
        };
        assert!(matches!(
            objective(Algo::Nmf, &d, x, 1.0, 1.0),
            Err(Error::Negative { .. })
        ));
    }

    #[test]
    fn missing_factor_is_rejected() {
        let d = eye_sparse(2);
        let i = DenseMatrix::identity(2);
        let x = FactorRefs {
            c: &i,
            w: None,
            t: None,
            f: None,
        };
        assert!(objective(Algo::Bdnmf, &d, x, 1.0, 1.0).is_err());
        assert!(objective(Algo::Nmf, &d, x, 1.0, 1.0).is_err());
    }
}
