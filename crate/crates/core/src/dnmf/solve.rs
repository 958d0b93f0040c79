use serde::{Deserialize, Serialize};

use super::config::{Algo, SolverConfig};
use super::kkt::{kkt_residual, KktResidual};
use super::objective::{evaluate, AffinityPenalty, FactorRefs};
use super::update::{cdnmf_step_with, nmf_step, sdnmf_step, IndicatorProducts, Weights};
use crate::error::{Error, Result};
use crate::numerics::{seeded_uniform_fill, stage_seed, DenseMatrix, SparseMatrix};

/// Allowed relative objective increase per step before descent is declared broken.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Objective changes below this fraction of `‖D‖²_F` are treated as
/// floating-point noise by the descent check.
pub const ROUNDOFF_FLOOR: f64 = 1e-20;

/// Lower end of the uniform initialization range; the fill excludes zero.
pub const INIT_LOW: f64 = 1e-3;

const CONVERGENCE_FLOOR: f64 = 1e-30;

/// Current factors of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorState {
    pub c: DenseMatrix,
    /// Free document-topic factor (nmf, cdnmf).
    pub w: Option<DenseMatrix>,
    /// Mask weights K × N (sdnmf) or transform K × K (cdnmf).
    pub t: Option<DenseMatrix>,
    pub iteration: usize,
    pub objective_trace: Vec<f64>,
    /// Filled only when KKT tracking is enabled.
    pub kkt_trace: Vec<KktResidual>,
}

impl FactorState {
    /// Seeded starting point for `cfg` on a V × N corpus.
    pub fn initial(cfg: &SolverConfig, n_words: usize, n_docs: usize) -> Result<Self> {
        let k = cfg.topics;
        let fill = |rows, cols, label| {
            seeded_uniform_fill(rows, cols, stage_seed(cfg.seed, label), INIT_LOW, 1.0)
        };
        let c = fill(n_words, k, "init.C")?;
        let (w, t) = match cfg.algo {
            Algo::Nmf => (Some(fill(k, n_docs, "init.W")?), None),
            Algo::Bdnmf => (None, None),
            Algo::Sdnmf => (None, Some(fill(k, n_docs, "init.W")?)),
            Algo::Cdnmf => (
                Some(fill(k, n_docs, "init.W")?),
                Some(fill(k, k, "init.T")?),
            ),
        };
        Ok(FactorState {
            c,
            w,
            t,
            iteration: 0,
            objective_trace: Vec::new(),
            kkt_trace: Vec::new(),
        })
    }

    pub fn refs<'a>(&'a self, f: Option<&'a DenseMatrix>) -> FactorRefs<'a> {
        FactorRefs {
            c: &self.c,
            w: self.w.as_ref(),
            t: self.t.as_ref(),
            f,
        }
    }

    /// The K × N topic-document matrix actually multiplying `C`.
    pub fn topic_document(&self, algo: Algo, f: Option<&DenseMatrix>) -> Result<DenseMatrix> {
        let missing = |what: &str| Error::invalid(format!("{algo} state has no {what}"));
        match algo {
            Algo::Nmf | Algo::Cdnmf => self.w.clone().ok_or_else(|| missing("W")),
            Algo::Bdnmf => f.cloned().ok_or_else(|| missing("f(D)")),
            Algo::Sdnmf => {
                let f = f.ok_or_else(|| missing("f(D)"))?;
                f.hadamard(self.t.as_ref().ok_or_else(|| missing("T"))?)
            }
        }
    }

    /// `C` with columns scaled to sum to one.
    pub fn normalized_topics(&self) -> DenseMatrix {
        self.c.normalize_columns_l1()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: Algo,
    pub topics: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    pub kkt_trace: Vec<KktResidual>,
    pub final_objective: f64,
    pub final_kkt: KktResidual,
}

fn check_inputs(cfg: &SolverConfig, d: &SparseMatrix, f: Option<&DenseMatrix>) -> Result<()> {
    cfg.validate()?;
    if cfg.algo.needs_indicator() {
        let f =
            f.ok_or_else(|| Error::invalid(format!("{} needs a cluster indicator", cfg.algo)))?;
        if f.shape() != (cfg.topics, d.cols()) {
            return Err(Error::Shape {
                op: "indicator",
                left: f.shape(),
                right: (cfg.topics, d.cols()),
            });
        }
        f.check_nonnegative("f(D)")?;
    }
    Ok(())
}

/// Runs `cfg.algo` from its seeded initialization.
pub fn solve(
    cfg: &SolverConfig,
    d: &SparseMatrix,
    f: Option<&DenseMatrix>,
) -> Result<(FactorState, RunReport)> {
    check_inputs(cfg, d, f)?;
    let init = FactorState::initial(cfg, d.rows(), d.cols())?;
    solve_from(cfg, d, f, init)
}

/// Runs `cfg.algo` starting from `state`. Any existing trace is discarded.
pub fn solve_from(
    cfg: &SolverConfig,
    d: &SparseMatrix,
    f: Option<&DenseMatrix>,
    mut state: FactorState,
) -> Result<(FactorState, RunReport)> {
    check_inputs(cfg, d, f)?;
    let f = if cfg.algo.needs_indicator() { f } else { None };
    let (l1, l2) = (cfg.lambda1, cfg.lambda2);
    let penalty = AffinityPenalty::new(d);
    let products = match cfg.algo {
        Algo::Bdnmf => Some(IndicatorProducts::new(d, f.expect("checked"))?),
        _ => None,
    };

    state.iteration = 0;
    state.objective_trace.clear();
    state.kkt_trace.clear();
    let mut prev = evaluate(cfg.algo, d, state.refs(f), l1, l2, &penalty)?.total;
    state.objective_trace.push(prev);
    if cfg.track_kkt {
        state
            .kkt_trace
            .push(kkt_residual(cfg.algo, d, state.refs(f), l1, l2)?);
    }

    let noise = ROUNDOFF_FLOOR * d.frobenius_sq();
    let mut converged = false;
    while state.iteration < cfg.max_iter {
        match cfg.algo {
            Algo::Nmf => {
                let w = state.w.as_ref().expect("nmf state has W");
                let (c, w) = nmf_step(&state.c, w, d)?;
                state.c = c;
                state.w = Some(w);
            }
            Algo::Bdnmf => {
                state.c = products.as_ref().expect("bdnmf products").step(&state.c)?;
            }
            Algo::Sdnmf => {
                let t = state.t.as_ref().expect("sdnmf state has T");
                let (t, c) = sdnmf_step(&state.c, t, d, f.expect("checked"))?;
                state.t = Some(t);
                state.c = c;
            }
            Algo::Cdnmf => {
                let w = state.w.as_ref().expect("cdnmf state has W");
                let t = state.t.as_ref().expect("cdnmf state has T");
                let weights = Weights {
                    lambda1: l1,
                    lambda2: l2,
                };
                let (w, c, t) =
                    cdnmf_step_with(&state.c, w, t, d, f.expect("checked"), weights, &penalty)?;
                state.w = Some(w);
                state.c = c;
                state.t = Some(t);
            }
        }
        state.iteration += 1;
        let current = evaluate(cfg.algo, d, state.refs(f), l1, l2, &penalty)?.total;
        if current > prev * (1.0 + MONOTONE_SLACK) + noise {
            return Err(Error::MonotonicityViolated {
                iteration: state.iteration,
                previous: prev,
                current,
            });
        }
        state.objective_trace.push(current);
        if cfg.track_kkt {
            state
                .kkt_trace
                .push(kkt_residual(cfg.algo, d, state.refs(f), l1, l2)?);
        }
        let change = (prev - current).abs() / prev.max(CONVERGENCE_FLOOR);
        prev = current;
        if change < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let final_kkt = match state.kkt_trace.last() {
        Some(k) => *k,
        None => kkt_residual(cfg.algo, d, state.refs(f), l1, l2)?,
    };
    let report = RunReport {
        algo: cfg.algo,
        topics: cfg.topics,
        seed: cfg.seed,
        iterations: state.iteration,
        converged,
        objective_trace: state.objective_trace.clone(),
        kkt_trace: state.kkt_trace.clone(),
        final_objective: prev,
        final_kkt,
    };
    Ok((state, report))
}
