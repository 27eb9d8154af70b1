use serde::{Deserialize, Serialize};

use super::CartError;
use crate::stats::chi_square_sf;

/// Null distribution the leaf's class counts are tested against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceNull {
    /// Expected count n/k for every class.
    #[default]
    Uniform,
    /// Expected count n * (training class fraction).
    TrainingPrior,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfidenceConfig {
    #[serde(default)]
    pub null: ConfidenceNull,
    /// Apply Yates' continuity correction to each |observed - expected|.
    #[serde(default)]
    pub yates: bool,
}

/// Chi-square goodness-of-fit p-value of a leaf's class counts against a
/// uniform null, df = k - 1. 0 means full confidence, 1 none.
pub fn leaf_confidence(counts: &[u64]) -> Result<f64, CartError> {
    leaf_confidence_with(counts, ConfidenceConfig::default(), &[])
}

/// As [`leaf_confidence`], with a configurable null. `prior` is only read
/// for [`ConfidenceNull::TrainingPrior`] and must then have one entry per class.
pub fn leaf_confidence_with(counts: &[u64], config: ConfidenceConfig, prior: &[f64]) -> Result<f64, CartError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(CartError::EmptyCounts);
    }
    if counts.len() < 2 {
        return Err(CartError::InvalidTree("need at least two classes".into()));
    }
    let n = total as f64;
    let k = counts.len();
    let expected: Vec<f64> = match config.null {
        ConfidenceNull::Uniform => vec![n / k as f64; k],
        ConfidenceNull::TrainingPrior => {
            if prior.len() != k {
                return Err(CartError::InvalidTree("prior length does not match class count".into()));
            }
            prior.iter().map(|p| n * p).collect()
        }
    };
    let mut stat = 0.0;
    for (&o, &e) in counts.iter().zip(&expected) {
        let diff = (o as f64 - e).abs();
        let diff = if config.yates { (diff - 0.5).max(0.0) } else { diff };
        if e > 0.0 {
            stat += diff * diff / e;
        } else if o > 0 {
            return Ok(0.0);
        }
    }
    Ok(chi_square_sf(stat, (k - 1) as u32)?)
}
