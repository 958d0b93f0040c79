use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factorization variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    /// Plain two-factor NMF, `D ≈ CW`.
    Nmf,
    /// `W` fixed to the cluster indicator; only `C` is learned.
    Bdnmf,
    /// `W = F ⊙ T` with a learned mask weight `T` (K × N).
    Sdnmf,
    /// Free `W` regressed onto the indicator through a K × K transform, plus
    /// a word-word affinity penalty on `C`.
    Cdnmf,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Nmf, Algo::Bdnmf, Algo::Sdnmf, Algo::Cdnmf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Nmf => "nmf",
            Algo::Bdnmf => "bdnmf",
            Algo::Sdnmf => "sdnmf",
            Algo::Cdnmf => "cdnmf",
        }
    }

    /// Whether the variant consumes the cluster indicator.
    pub fn needs_indicator(self) -> bool {
        self != Algo::Nmf
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nmf" => Ok(Algo::Nmf),
            "bdnmf" => Ok(Algo::Bdnmf),
            "sdnmf" => Ok(Algo::Sdnmf),
            "cdnmf" => Ok(Algo::Cdnmf),
            other => Err(Error::invalid(format!(
                "unknown algorithm {other:?} (expected nmf, bdnmf, sdnmf or cdnmf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algo: Algo,
    pub topics: usize,
    /// Weight of the indicator regression term (cdnmf).
    pub lambda1: f64,
    /// Weight of the word-word affinity term (cdnmf).
    pub lambda2: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
    /// Record KKT residuals after every iteration, not only at the end.
    pub track_kkt: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algo: Algo::Bdnmf,
            topics: 2,
            lambda1: 1.0,
            lambda2: 1.0,
            max_iter: 500,
            rel_tol: 1e-6,
            seed: 0,
            track_kkt: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topics < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 topics, got {}",
                self.topics
            )));
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0)
            || !self.lambda1.is_finite()
            || !self.lambda2.is_finite()
        {
            return Err(Error::invalid(format!(
                "lambda1 and lambda2 must be finite and >= 0, got {} and {}",
                self.lambda1, self.lambda2
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for a in Algo::ALL {
            assert_eq!(a.to_string().parse::<Algo>().unwrap(), a);
        }
        assert!("lda".parse::<Algo>().is_err());
    }

    #[test]
    fn validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig {
                topics: 1,
                ..Default::default()
            },
            SolverConfig {
                lambda1: -1.0,
                ..Default::default()
            },
            SolverConfig {
                lambda2: f64::NAN,
                ..Default::default()
            },
            SolverConfig {
                rel_tol: 0.0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
