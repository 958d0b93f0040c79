//! Dense and sparse nonnegative matrix substrate.

pub(crate) mod dense;
pub mod mtx;
mod random;
mod sparse;

pub use dense::{frobenius_sq, hadamard, multiplicative_update, DenseMatrix, EPS_DIV};
pub use random::{derive_seed, seeded_uniform_fill, stage_seed, stream, StreamRng};
pub use sparse::{matmul, MatMul, SparseMatrix};
