use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Generator used for every seeded stream in the crate.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a base seed and a sequence of keys.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Derives a seed for a named pipeline stage (e.g. `"mbn"`, `"init.C"`).
pub fn stage_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label bytes.
    let h = label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    });
    derive_seed(seed, &[h])
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Matrix with entries drawn uniformly from `(low, high]`.
pub fn seeded_uniform_fill(
    rows: usize,
    cols: usize,
    seed: u64,
    low: f64,
    high: f64,
) -> Result<DenseMatrix> {
    if !(low > 0.0) {
        return Err(Error::invalid(format!(
            "uniform fill lower bound must be > 0, got {low}"
        )));
    }
    if !(high > low) || !high.is_finite() {
        return Err(Error::invalid(format!(
            "uniform fill needs low < high, got ({low}, {high}]"
        )));
    }
    let mut rng = stream(seed);
    let span = high - low;
    let data = (0..rows * cols)
        .map(|_| {
            // u ∈ [0, 1) maps to (low, high].
            let u: f64 = rng.random();
            (high - u * span).max(f64::from_bits(low.to_bits() + 1))
        })
        .collect();
    DenseMatrix::from_vec(rows, cols, data)
}
