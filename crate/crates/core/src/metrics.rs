//! Model-level metrics that keep error types apart, and reliability-diagram
//! data for calibration plots.
//!
//! The positive class is the schema's designated "high risk" label, so a
//! false negative is a high-risk patient told they are low risk.

use serde::{Deserialize, Serialize};

use crate::cart::{predict, CartError, DecisionTree};
use crate::tabular::Dataset;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("{metric} is undefined: its denominator is zero")]
    UndefinedMetric { metric: &'static str },
    #[error("no rows to evaluate")]
    EmptyDataset,
    #[error("no scored predictions")]
    EmptyInput,
    #[error("test data schema differs from the model schema")]
    SchemaMismatch,
    #[error("need at least 2 bins")]
    TooFewBins,
    #[error("confidence score {0} is outside [0.5, 1]")]
    ScoreOutOfRange(f64),
    #[error(transparent)]
    Cart(#[from] CartError),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UndefinedMetric { .. } => "UndefinedMetric",
            Self::EmptyDataset => "EmptyDataset",
            Self::EmptyInput => "EmptyInput",
            Self::SchemaMismatch => "SchemaMismatch",
            Self::TooFewBins => "TooFewBins",
            Self::ScoreOutOfRange(_) => "ScoreOutOfRange",
            Self::Cart(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: u64, den: u64, metric: &'static str) -> Result<f64, MetricsError> {
    if den == 0 {
        Err(MetricsError::UndefinedMetric { metric })
    } else {
        Ok(num as f64 / den as f64)
    }
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> Result<f64, MetricsError> {
        ratio(self.tp + self.tn, self.total(), "accuracy")
    }

    pub fn recall(&self) -> Result<f64, MetricsError> {
        ratio(self.tp, self.tp + self.fn_, "recall")
    }

    pub fn false_negative_rate(&self) -> Result<f64, MetricsError> {
        ratio(self.fn_, self.tp + self.fn_, "false_negative_rate")
    }

    pub fn false_omission_rate(&self) -> Result<f64, MetricsError> {
        ratio(self.fn_, self.fn_ + self.tn, "false_omission_rate")
    }

    pub fn precision(&self) -> Result<f64, MetricsError> {
        ratio(self.tp, self.tp + self.fp, "precision")
    }

    /// Relabels positive as negative and vice versa.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            accuracy: self.accuracy().ok(),
            recall: self.recall().ok(),
            false_negative_rate: self.false_negative_rate().ok(),
            false_omission_rate: self.false_omission_rate().ok(),
            precision: self.precision().ok(),
        }
    }
}

/// All headline metrics; `None` where the metric is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub false_negative_rate: Option<f64>,
    pub false_omission_rate: Option<f64>,
    pub precision: Option<f64>,
}

/// Predicts every test row and tallies against its true label.
pub fn evaluate(tree: &DecisionTree, test: &Dataset) -> Result<ConfusionMatrix, MetricsError> {
    if test.schema != tree.schema {
        return Err(MetricsError::SchemaMismatch);
    }
    if test.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let positive = tree.schema.positive_class();
    let mut m = ConfusionMatrix::default();
    for row in &test.rows {
        let p = predict(tree, &row.values)?;
        let predicted_positive = tree.schema.class_index(&p.label) == Some(positive);
        let actual_positive = row.label == positive;
        match (predicted_positive, actual_positive) {
            (true, true) => m.tp += 1,
            (true, false) => m.fp += 1,
            (false, false) => m.tn += 1,
            (false, true) => m.fn_ += 1,
        }
    }
    Ok(m)
}

/// `(confidence score, prediction was correct)` for every test row, where the
/// score is the leaf majority fraction `max(counts) / samples`.
pub fn scored_predictions(tree: &DecisionTree, test: &Dataset) -> Result<Vec<(f64, bool)>, MetricsError> {
    if test.schema != tree.schema {
        return Err(MetricsError::SchemaMismatch);
    }
    test.rows
        .iter()
        .map(|row| {
            let p = predict(tree, &row.values)?;
            let correct = tree.schema.class_index(&p.label) == Some(row.label);
            Ok((p.majority_fraction(&tree.schema), correct))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lo: f64,
    pub hi: f64,
    /// `None` when the bin is empty.
    pub mean_confidence: Option<f64>,
    pub observed_accuracy: Option<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityDiagram {
    pub bins: Vec<ReliabilityBin>,
}

impl ReliabilityDiagram {
    /// `bin_lo,bin_hi,mean_confidence,observed_accuracy,count`; empty bins
    /// leave the two averages blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,mean_confidence,observed_accuracy,count\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                b.lo,
                b.hi,
                opt(b.mean_confidence),
                opt(b.observed_accuracy),
                b.count
            ));
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Equal-width bins over `[0.5, 1.0]`, right-open except the last.
pub fn reliability(scored: &[(f64, bool)], n_bins: usize) -> Result<ReliabilityDiagram, MetricsError> {
    if n_bins < 2 {
        return Err(MetricsError::TooFewBins);
    }
    if scored.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let width = 0.5 / n_bins as f64;
    let mut sums = vec![(0.0f64, 0u64, 0u64); n_bins];
    for &(score, correct) in scored {
        if !(0.5..=1.0).contains(&score) {
            return Err(MetricsError::ScoreOutOfRange(score));
        }
        let bin = (((score - 0.5) / width) as usize).min(n_bins - 1);
        let s = &mut sums[bin];
        s.0 += score;
        s.1 += u64::from(correct);
        s.2 += 1;
    }
    // 0.5 + 0.5·i/n rounds to the shortest decimal more often than 0.5 + i·width
    let edge = |i: usize| if i == n_bins { 1.0 } else { 0.5 + 0.5 * i as f64 / n_bins as f64 };
    let bins = sums
        .into_iter()
        .enumerate()
        .map(|(i, (conf, hits, count))| {
            let (mean_confidence, observed_accuracy) = if count == 0 {
                (None, None)
            } else {
                (Some(conf / count as f64), Some(hits as f64 / count as f64))
            };
            ReliabilityBin {
                lo: edge(i),
                hi: edge(i + 1),
                mean_confidence,
                observed_accuracy,
                count,
            }
        })
        .collect();
    Ok(ReliabilityDiagram { bins })
}
