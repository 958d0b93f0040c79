use serde::{Deserialize, Serialize};

use super::config::Algo;
use super::objective::FactorRefs;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SparseMatrix};

/// Gradients of the objective with respect to each free factor.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub c: DenseMatrix,
    pub w: Option<DenseMatrix>,
    pub t: Option<DenseMatrix>,
}

fn need<'a>(m: Option<&'a DenseMatrix>, what: &str, algo: Algo) -> Result<&'a DenseMatrix> {
    m.ok_or_else(|| Error::invalid(format!("{algo} gradient needs {what}")))
}

/// `2(C WWᵀ − D Wᵀ)`: gradient of `‖D − CW‖²` in `C`.
fn grad_c_reconstruction(
    d: &SparseMatrix,
    c: &DenseMatrix,
    w: &DenseMatrix,
) -> Result<DenseMatrix> {
    let pos = c.matmul(&w.matmul_tr(w)?)?;
    let neg = d.matmul_dense(&w.transpose())?;
    Ok(pos.sub(&neg)?.scale(2.0))
}

/// `2(CᵀC W − CᵀD)`: gradient of `‖D − CW‖²` in `W`.
fn grad_w_reconstruction(
    d: &SparseMatrix,
    c: &DenseMatrix,
    w: &DenseMatrix,
) -> Result<DenseMatrix> {
    let pos = c.tr_matmul(c)?.matmul(w)?;
    let neg = d.left_tr_matmul(c)?;
    Ok(pos.sub(&neg)?.scale(2.0))
}

/// Analytic gradients of the objective of `algo`.
///
/// * nmf: `∇C = 2(CWWᵀ − DWᵀ)`, `∇W = 2(CᵀCW − CᵀD)`
/// * bdnmf: `∇C` as nmf with `W = F`
/// * sdnmf: `∇C` with `W = F ⊙ T`, `∇T = 2 F ⊙ (CᵀCW − CᵀD)`
/// * cdnmf: `∇C += 4λ₂(CCᵀC − DDᵀC)`, `∇W += 2λ₁(TᵀTW − TᵀF)`,
///   `∇T = 2λ₁(TWWᵀ − FWᵀ)`
pub fn gradients(
    algo: Algo,
    d: &SparseMatrix,
    x: FactorRefs<'_>,
    lambda1: f64,
    lambda2: f64,
) -> Result<Gradients> {
    let c = x.c;
    match algo {
        Algo::Nmf => {
            let w = need(x.w, "W", algo)?;
            Ok(Gradients {
                c: grad_c_reconstruction(d, c, w)?,
                w: Some(grad_w_reconstruction(d, c, w)?),
                t: None,
            })
        }
        Algo::Bdnmf => {
            let f = need(x.f, "f(D)", algo)?;
            Ok(Gradients {
                c: grad_c_reconstruction(d, c, f)?,
                w: None,
                t: None,
            })
        }
        Algo::Sdnmf => {
            let f = need(x.f, "f(D)", algo)?;
            let t = need(x.t, "T", algo)?;
            let w = f.hadamard(t)?;
            Ok(Gradients {
                c: grad_c_reconstruction(d, c, &w)?,
                w: None,
                t: Some(grad_w_reconstruction(d, c, &w)?.hadamard(f)?),
            })
        }
        Algo::Cdnmf => {
            let f = need(x.f, "f(D)", algo)?;
            let t = need(x.t, "T", algo)?;
            let w = need(x.w, "W", algo)?;
            let mut gc = grad_c_reconstruction(d, c, w)?;
            let cctc = c.matmul(&c.tr_matmul(c)?)?;
            let ddtc = d.matmul_dense(&d.left_tr_matmul(c)?.transpose())?;
            gc.add_scaled(4.0 * lambda2, &cctc.sub(&ddtc)?)?;
            let mut gw = grad_w_reconstruction(d, c, w)?;
            let ttw = t.tr_matmul(t)?.matmul(w)?;
            gw.add_scaled(2.0 * lambda1, &ttw.sub(&t.tr_matmul(f)?)?)?;
            let wwt = w.matmul_tr(w)?;
            let gt = t.matmul(&wwt)?.sub(&f.matmul_tr(w)?)?.scale(2.0 * lambda1);
            Ok(Gradients {
                c: gc,
                w: Some(gw),
                t: Some(gt),
            })
        }
    }
}

/// Per-factor first-order optimality residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    pub c: f64,
    pub w: Option<f64>,
    pub t: Option<f64>,
}

impl KktResidual {
    /// Largest residual over all factors.
    pub fn max(&self) -> f64 {
        [Some(self.c), self.w, self.t]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// `max |min(X, ∇X)|` over entries: zero exactly when `X ≥ 0`, `∇X ≥ 0` and
/// `X ⊙ ∇X = 0`.
pub fn complementarity(x: &DenseMatrix, grad: &DenseMatrix) -> f64 {
    x.as_slice()
        .iter()
        .zip(grad.as_slice())
        .map(|(&a, &g)| a.min(g).abs())
        .fold(0.0, f64::max)
}

/// KKT residual of every free factor of `algo`.
pub fn kkt_residual(
    algo: Algo,
    d: &SparseMatrix,
    x: FactorRefs<'_>,
    lambda1: f64,
    lambda2: f64,
) -> Result<KktResidual> {
    let g = gradients(algo, d, x, lambda1, lambda2)?;
    let w = match (&g.w, x.w) {
        (Some(gw), Some(w)) => Some(complementarity(w, gw)),
        _ => None,
    };
    let t = match (&g.t, x.t) {
        (Some(gt), Some(t)) => Some(complementarity(t, gt)),
        _ => None,
    };
    Ok(KktResidual {
        c: complementarity(x.c, &g.c),
        w,
        t,
    })
}
