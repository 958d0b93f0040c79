//! Nonnegative factorization solvers guided by a document cluster indicator.
//!
//! `D ≈ C W` with `C` the V × K topic-word matrix. The variants differ in how
//! `W` relates to the indicator `F = f(D)`: free (nmf), equal (bdnmf), masked
//! (sdnmf) or regressed (cdnmf).

mod config;
mod kkt;
mod objective;
mod solve;
mod update;

pub use config::{Algo, SolverConfig};
pub use kkt::{complementarity, gradients, kkt_residual, Gradients, KktResidual};
pub use objective::{objective, reconstruction_error, AffinityPenalty, FactorRefs, ObjectiveTerms};
pub use solve::{
    solve, solve_from, FactorState, RunReport, INIT_LOW, MONOTONE_SLACK, ROUNDOFF_FLOOR,
};
pub use update::{bdnmf_step, cdnmf_step, nmf_step, sdnmf_step, Weights};
