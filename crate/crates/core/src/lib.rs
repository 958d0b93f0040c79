//! Deep-NMF topic modeling.
//!
//! Documents are clustered with a multilayer bootstrap network ([`mbn`]); the
//! resulting one-hot indicator `f(D)` then constrains a nonnegative
//! factorization `D ≈ C W` of the TF-IDF matrix ([`dnmf`]). [`eval`] scores
//! the result by clustering accuracy, coherence and topic overlap.

pub mod corpus;
pub mod dnmf;
pub mod error;
pub mod eval;
pub mod mbn;
pub mod numerics;
pub mod synth;

pub use corpus::{Corpus, CorpusFormat, CorpusOptions, Vocabulary};
pub use dnmf::{solve, Algo, FactorState, KktResidual, RunReport, SolverConfig};
pub use error::{Error, Result};
pub use eval::{clustering_accuracy, MetricsReport, PairMode, TopicWords};
pub use mbn::{cluster_documents, ClusterIndicator, MbnConfig, MbnModel};
pub use numerics::{DenseMatrix, SparseMatrix};
