//! Multilayer bootstrap network document clustering.
//!
//! Each layer runs many k-centroid clusterings whose centroids are randomly
//! sampled documents; every document is encoded by the one-hot id of its
//! most cosine-similar centroid in each clustering, and the concatenated
//! codes feed the next, narrower layer. Spectral clustering of the top
//! layer yields the document-topic indicator.

mod layer;
mod schedule;
mod spectral;

use serde::{Deserialize, Serialize};

pub use layer::{apply_layer, train_layer, Layer, OneHotCode, Representation};
pub use schedule::{layer_widths, terminal_width};
pub use spectral::{kmeans, spectral_cluster, spectral_cluster_affinity, ClusterIndicator};

use crate::error::{Error, Result};
use crate::numerics::{stage_seed, SparseMatrix};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbnConfig {
    /// Clusterings per layer (M).
    pub clusterings: usize,
    /// Width decay δ ∈ [0, 1).
    pub delta: f64,
    /// Overrides the top-layer width.
    pub k_top: Option<usize>,
    /// Number of topics (clusters of the spectral head).
    pub topics: usize,
    /// Treat the corpus as strongly class imbalanced.
    pub imbalanced: bool,
    /// Size of the smallest class, when known.
    pub smallest_class: Option<usize>,
    pub seed: u64,
}

impl Default for MbnConfig {
    fn default() -> Self {
        MbnConfig {
            clusterings: 400,
            delta: 0.5,
            k_top: None,
            topics: 2,
            imbalanced: false,
            smallest_class: None,
            seed: 0,
        }
    }
}

impl MbnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusterings == 0 {
            return Err(Error::invalid(
                "MBN needs at least one clustering per layer",
            ));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::invalid(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if self.topics < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 topics, got {}",
                self.topics
            )));
        }
        Ok(())
    }

    pub fn widths(&self, n_docs: usize) -> Result<Vec<usize>> {
        layer_widths(
            n_docs,
            self.topics,
            self.delta,
            self.imbalanced,
            self.smallest_class,
            self.k_top,
        )
    }
}

/// Everything needed to recompute the top-layer code of the training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbnModel {
    pub version: u32,
    pub seed: u64,
    pub clusterings: usize,
    pub layers: Vec<Layer>,
}

impl MbnModel {
    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.width).collect()
    }

    /// Re-runs the stored layers on `d` without sampling.
    pub fn replay(&self, d: &SparseMatrix) -> Result<OneHotCode> {
        if self.version != MODEL_VERSION {
            return Err(Error::invalid(format!(
                "unsupported MBN model version {}",
                self.version
            )));
        }
        let mut input = Representation::Sparse(d.clone());
        let mut code = None;
        for layer in &self.layers {
            let out = apply_layer(&input, layer)?;
            input = Representation::OneHot(out.clone());
            code = Some(out);
        }
        code.ok_or_else(|| Error::invalid("MBN model has no layers"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Trains the stacked layers on the document-word matrix `d` (words × docs)
/// and returns the model with its top-layer code.
pub fn mbn_transform(d: &SparseMatrix, cfg: &MbnConfig) -> Result<(MbnModel, OneHotCode)> {
    cfg.validate()?;
    let widths = cfg.widths(d.cols())?;
    let layer_seed = stage_seed(cfg.seed, "mbn.layers");
    let mut input = Representation::Sparse(d.clone());
    let mut layers = Vec::with_capacity(widths.len());
    let mut top = None;
    for (l, &k) in widths.iter().enumerate() {
        let (layer, code) = train_layer(&input, k, cfg.clusterings, layer_seed, l)?;
        layers.push(layer);
        input = Representation::OneHot(code.clone());
        top = Some(code);
    }
    let model = MbnModel {
        version: MODEL_VERSION,
        seed: cfg.seed,
        clusterings: cfg.clusterings,
        layers,
    };
    Ok((model, top.expect("schedule has at least one layer")))
}

/// Full clustering: MBN layers followed by the spectral head.
pub fn cluster_documents(
    d: &SparseMatrix,
    cfg: &MbnConfig,
) -> Result<(MbnModel, ClusterIndicator)> {
    let (model, top) = mbn_transform(d, cfg)?;
    let indicator = spectral_cluster(
        &Representation::OneHot(top),
        cfg.topics,
        stage_seed(cfg.seed, "mbn.spectral"),
    )?;
    Ok((model, indicator))
}
