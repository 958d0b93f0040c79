//! One iteration of each multiplicative update scheme.
//!
//! Every rule has the form `X ← X ⊙ N / (Q + ε)` where `N` and `Q` are the
//! negative and positive parts of the objective's gradient in `X`, so
//! nonnegativity is preserved and zero entries stay zero.

use super::objective::{reconstruction_error, AffinityPenalty};
use crate::error::{Error, Result};
use crate::numerics::{multiplicative_update, DenseMatrix, SparseMatrix};

/// Largest number of step halvings tried by the affinity-penalized `C`
/// update before the old `C` is kept.
const MAX_BACKTRACK: usize = 30;

fn check_factor_shapes(d: &SparseMatrix, c: &DenseMatrix, w: &DenseMatrix) -> Result<()> {
    if c.rows() != d.rows() || w.cols() != d.cols() || c.cols() != w.rows() {
        return Err(Error::Shape {
            op: "factor update",
            left: (c.rows(), w.cols()),
            right: d.shape(),
        });
    }
    Ok(())
}

/// `W ← W ⊙ CᵀD / (CᵀC W)`.
fn update_w_plain(c: &DenseMatrix, w: &DenseMatrix, d: &SparseMatrix) -> Result<DenseMatrix> {
    let ctd = d.left_tr_matmul(c)?;
    let ctc = c.tr_matmul(c)?;
    multiplicative_update(w, &ctd, &ctc.matmul(w)?)
}

/// `C ← C ⊙ DWᵀ / (C WWᵀ)`.
fn update_c_plain(c: &DenseMatrix, w: &DenseMatrix, d: &SparseMatrix) -> Result<DenseMatrix> {
    let dwt = d.matmul_dense(&w.transpose())?;
    let wwt = w.matmul_tr(w)?;
    multiplicative_update(c, &dwt, &c.matmul(&wwt)?)
}

/// Baseline NMF: `W` first, then `C` with the new `W`.
pub fn nmf_step(
    c: &DenseMatrix,
    w: &DenseMatrix,
    d: &SparseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    check_factor_shapes(d, c, w)?;
    let w_next = update_w_plain(c, w, d)?;
    let c_next = update_c_plain(c, &w_next, d)?;
    Ok((c_next, w_next))
}

/// Products of the fixed indicator reused by every bdnmf step.
#[derive(Debug, Clone)]
pub(crate) struct IndicatorProducts {
    dft: DenseMatrix,
    fft: DenseMatrix,
}

impl IndicatorProducts {
    pub(crate) fn new(d: &SparseMatrix, f: &DenseMatrix) -> Result<Self> {
        if f.cols() != d.cols() {
            return Err(Error::Shape {
                op: "indicator products",
                left: f.shape(),
                right: d.shape(),
            });
        }
        Ok(IndicatorProducts {
            dft: d.matmul_dense(&f.transpose())?,
            fft: f.matmul_tr(f)?,
        })
    }

    pub(crate) fn step(&self, c: &DenseMatrix) -> Result<DenseMatrix> {
        if c.shape() != self.dft.shape() {
            return Err(Error::Shape {
                op: "bdnmf_step",
                left: c.shape(),
                right: self.dft.shape(),
            });
        }
        multiplicative_update(c, &self.dft, &c.matmul(&self.fft)?)
    }
}

/// bdnmf: `C ← C ⊙ D Fᵀ / (C F Fᵀ)` with `W = F` held fixed.
pub fn bdnmf_step(c: &DenseMatrix, d: &SparseMatrix, f: &DenseMatrix) -> Result<DenseMatrix> {
    check_factor_shapes(d, c, f)?;
    IndicatorProducts::new(d, f)?.step(c)
}

/// sdnmf: mask weights `T` first, then `C`, with `W = F ⊙ T`.
///
/// `T ← T ⊙ ((CᵀD) ⊙ F) / ((CᵀC (F ⊙ T)) ⊙ F)`, then
/// `C ← C ⊙ D Wᵀ / (C W Wᵀ)` using the new `W`. Returns `(T', C')`.
pub fn sdnmf_step(
    c: &DenseMatrix,
    t: &DenseMatrix,
    d: &SparseMatrix,
    f: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if t.shape() != f.shape() {
        return Err(Error::Shape {
            op: "sdnmf_step",
            left: t.shape(),
            right: f.shape(),
        });
    }
    let w = f.hadamard(t)?;
    check_factor_shapes(d, c, &w)?;
    let ctd = d.left_tr_matmul(c)?;
    let ctc = c.tr_matmul(c)?;
    let numer = ctd.hadamard(f)?;
    let denom = ctc.matmul(&w)?.hadamard(f)?;
    let t_next = multiplicative_update(t, &numer, &denom)?;
    let w_next = f.hadamard(&t_next)?;
    let c_next = update_c_plain(c, &w_next, d)?;
    Ok((t_next, c_next))
}

/// Penalty weights of the cdnmf objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// cdnmf `C` update with the affinity penalty:
/// `C ← C ⊙ (DWᵀ + 2λ₂DDᵀC) / (CWWᵀ + 2λ₂CCᵀC)`.
///
/// The quartic penalty makes this ratio a heuristic rather than a majorizer,
/// so the full step is accepted only when it does not raise
/// `‖D − CW‖² + λ₂Ω(C)`. Otherwise the ratio is raised to powers 1/2, 1/4, …
/// (a descent direction for small powers) and the old `C` is kept if no
/// power helps.
pub(crate) fn update_c_affinity(
    c: &DenseMatrix,
    w: &DenseMatrix,
    d: &SparseMatrix,
    lambda2: f64,
    penalty: &AffinityPenalty<'_>,
) -> Result<DenseMatrix> {
    let mut numer = d.matmul_dense(&w.transpose())?;
    let mut denom = c.matmul(&w.matmul_tr(w)?)?;
    let dtc = d.left_tr_matmul(c)?.transpose();
    numer.add_scaled(2.0 * lambda2, &d.matmul_dense(&dtc)?)?;
    denom.add_scaled(2.0 * lambda2, &c.matmul(&c.tr_matmul(c)?)?)?;
    let full = multiplicative_update(c, &numer, &denom)?;

    let sub_objective = |x: &DenseMatrix| -> Result<f64> {
        Ok(reconstruction_error(d, x, w)? + lambda2 * penalty.eval(x)?)
    };
    let before = sub_objective(c)?;
    if sub_objective(&full)? <= before {
        return Ok(full);
    }
    let ratio = multiplicative_update(
        &DenseMatrix::filled(c.rows(), c.cols(), 1.0),
        &numer,
        &denom,
    )?;
    let mut power = 1.0;
    for _ in 0..MAX_BACKTRACK {
        power *= 0.5;
        let candidate = DenseMatrix::from_vec(
            c.rows(),
            c.cols(),
            c.as_slice()
                .iter()
                .zip(ratio.as_slice())
                .map(|(&x, &r)| x * r.powf(power))
                .collect(),
        )?;
        if sub_objective(&candidate)? <= before {
            return Ok(candidate);
        }
    }
    Ok(c.clone())
}

pub(crate) fn cdnmf_step_with(
    c: &DenseMatrix,
    w: &DenseMatrix,
    t: &DenseMatrix,
    d: &SparseMatrix,
    f: &DenseMatrix,
    weights: Weights,
    penalty: &AffinityPenalty<'_>,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    check_factor_shapes(d, c, w)?;
    let k = c.cols();
    if t.shape() != (k, k) || f.shape() != w.shape() {
        return Err(Error::Shape {
            op: "cdnmf_step",
            left: t.shape(),
            right: f.shape(),
        });
    }
    let Weights { lambda1, lambda2 } = weights;

    // W: (CᵀD + λ₁TᵀF) / (CᵀCW + λ₁TᵀTW)
    let w_next = if lambda1 > 0.0 {
        let mut numer = d.left_tr_matmul(c)?;
        let mut denom = c.tr_matmul(c)?.matmul(w)?;
        numer.add_scaled(lambda1, &t.tr_matmul(f)?)?;
        denom.add_scaled(lambda1, &t.tr_matmul(t)?.matmul(w)?)?;
        multiplicative_update(w, &numer, &denom)?
    } else {
        update_w_plain(c, w, d)?
    };

    let c_next = if lambda2 > 0.0 {
        update_c_affinity(c, &w_next, d, lambda2, penalty)?
    } else {
        update_c_plain(c, &w_next, d)?
    };

    // T: F Wᵀ / (T W Wᵀ)
    let t_next = multiplicative_update(
        t,
        &f.matmul_tr(&w_next)?,
        &t.matmul(&w_next.matmul_tr(&w_next)?)?,
    )?;
    Ok((w_next, c_next, t_next))
}

/// cdnmf: `W`, then `C`, then `T`. Returns `(W', C', T')`.
pub fn cdnmf_step(
    c: &DenseMatrix,
    w: &DenseMatrix,
    t: &DenseMatrix,
    d: &SparseMatrix,
    f: &DenseMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let penalty = AffinityPenalty::new(d);
    cdnmf_step_with(c, w, t, d, f, Weights { lambda1, lambda2 }, &penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_uniform_fill;

    fn sparse(m: &DenseMatrix) -> SparseMatrix {
        SparseMatrix::from_dense(m).unwrap()
    }

    #[test]
    fn bdnmf_identity_fixture() {
        let d = sparse(&DenseMatrix::identity(2));
        let f = DenseMatrix::identity(2);
        let c = DenseMatrix::filled(2, 2, 0.5);
        let next = bdnmf_step(&c, &d, &f).unwrap();
        for (x, e) in next
            .as_slice()
            .iter()
            .zip(DenseMatrix::identity(2).as_slice())
        {
            assert!((x - e).abs() < 1e-11);
        }
    }

    #[test]
    fn bdnmf_fixed_point() {
        let f = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let c = DenseMatrix::from_rows(&[[2.0, 1.0], [0.5, 3.0], [1.0, 1.0]]);
        let d = sparse(&c.matmul(&f).unwrap());
        let next = bdnmf_step(&c, &d, &f).unwrap();
        for (a, b) in next.as_slice().iter().zip(c.as_slice()) {
            assert!((a - b).abs() < 1e-11 * b.max(1.0));
        }
    }

    #[test]
    fn bdnmf_zero_row() {
        let dd = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 0.0]]);
        let f = DenseMatrix::identity(2);
        let c = DenseMatrix::filled(2, 2, 0.7);
        let next = bdnmf_step(&c, &sparse(&dd), &f).unwrap();
        assert_eq!(next.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn nmf_zero_data_collapses() {
        let d = SparseMatrix::from_triplets(4, 3, Vec::new()).unwrap();
        let c = seeded_uniform_fill(4, 2, 1, 1e-3, 1.0).unwrap();
        let w = seeded_uniform_fill(2, 3, 2, 1e-3, 1.0).unwrap();
        let (c1, w1) = nmf_step(&c, &w, &d).unwrap();
        assert!(c1.as_slice().iter().all(|&v| v == 0.0));
        assert!(w1.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nmf_fixed_point() {
        let c = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
        let w = DenseMatrix::from_rows(&[[1.0, 0.5], [0.25, 1.0]]);
        let d = sparse(&c.matmul(&w).unwrap());
        let (c1, w1) = nmf_step(&c, &w, &d).unwrap();
        for (a, b) in c1.as_slice().iter().zip(c.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in w1.as_slice().iter().zip(w.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sdnmf_mask_absorbs() {
        let f = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]);
        let mut c = seeded_uniform_fill(5, 2, 3, 1e-3, 1.0).unwrap();
        let mut t = seeded_uniform_fill(2, 4, 4, 1e-3, 1.0).unwrap();
        let d = sparse(&seeded_uniform_fill(5, 4, 5, 1e-3, 1.0).unwrap());
        for _ in 0..5 {
            let (t1, c1) = sdnmf_step(&c, &t, &d, &f).unwrap();
            let w = f.hadamard(&t1).unwrap();
            for k in 0..2 {
                for j in 0..4 {
                    if f[(k, j)] == 0.0 {
                        assert_eq!(w[(k, j)], 0.0);
                    }
                }
            }
            c = c1;
            t = t1;
        }
    }

    #[test]
    fn sdnmf_fixed_point() {
        let f = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let t = DenseMatrix::from_rows(&[[0.5, 1.0, 2.0], [1.0, 1.5, 1.0]]);
        let c = DenseMatrix::from_rows(&[[1.0, 0.2], [0.3, 1.0], [0.5, 0.5]]);
        let d = sparse(&c.matmul(&f.hadamard(&t).unwrap()).unwrap());
        let (t1, c1) = sdnmf_step(&c, &t, &d, &f).unwrap();
        let w0 = f.hadamard(&t).unwrap();
        let w1 = f.hadamard(&t1).unwrap();
        for (a, b) in w1.as_slice().iter().zip(w0.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in c1.as_slice().iter().zip(c.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cdnmf_fixed_point() {
        // D = CW, F = TW and CCᵀ = DDᵀ requires WWᵀ = I: use W = I.
        let c = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]);
        let w = DenseMatrix::identity(2);
        let t = DenseMatrix::identity(2);
        let f = DenseMatrix::identity(2);
        let d = sparse(&c);
        let (w1, c1, t1) = cdnmf_step(&c, &w, &t, &d, &f, 1.0, 1.0).unwrap();
        for (a, b) in [(&w1, &w), (&c1, &c), (&t1, &t)] {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn shape_mismatches() {
        let d = sparse(&DenseMatrix::identity(3));
        let c = DenseMatrix::filled(3, 2, 1.0);
        let w = DenseMatrix::filled(2, 2, 1.0);
        assert!(nmf_step(&c, &w, &d).is_err());
        assert!(bdnmf_step(&c, &d, &w).is_err());
        let t = DenseMatrix::filled(2, 3, 1.0);
        assert!(sdnmf_step(&c, &t, &d, &w).is_err());
        let w3 = DenseMatrix::filled(2, 3, 1.0);
        assert!(cdnmf_step(&c, &w3, &t, &d, &w3, 1.0, 1.0).is_err());
    }
}
