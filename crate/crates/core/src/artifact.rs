//! The on-disk model file shared by the CLI and the service: a trained tree
//! or cycle model plus the metadata needed to communicate its predictions.

use serde::{Deserialize, Serialize};

use crate::cart::{train, CartError, DecisionTree, TrainParams};
use crate::cycles::{fit, CycleModel, CycleRecord, CyclesError, FitConfig};
use crate::metrics::{evaluate, ConfusionMatrix, MetricsError};
use crate::tabular::{split, Dataset, Schema, TabularError};

pub const MODEL_FORMAT: &str = "riskweave.model";
pub const MODEL_VERSION: u32 = 1;

/// Share of rows held out when a tree is trained through [`ModelEnvelope::train_tree`].
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("invalid model file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Cart(#[from] CartError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Cycles(#[from] CyclesError),
}

impl ArtifactError {
    pub fn code(&self) -> &'static str {
        match self {
            ArtifactError::Invalid(_) => "InvalidModel",
            ArtifactError::Tabular(e) => e.code(),
            ArtifactError::Cart(e) => e.code(),
            ArtifactError::Metrics(e) => e.code(),
            ArtifactError::Cycles(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum Artifact {
    Tree(DecisionTree),
    Cycles(CycleModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvelopeDocument", into = "EnvelopeDocument")]
pub struct ModelEnvelope {
    /// RFC 3339; set by whoever persists the model.
    pub created_at: Option<String>,
    /// Held-out accuracy; drives the accuracy axis of the verbal map.
    pub accuracy: Option<f64>,
    pub confusion_matrix: Option<ConfusionMatrix>,
    pub train_size: u64,
    pub test_size: u64,
    pub artifact: Artifact,
}

#[derive(Serialize, Deserialize)]
struct EnvelopeDocument {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_at: Option<String>,
    accuracy: Option<f64>,
    confusion_matrix: Option<ConfusionMatrix>,
    train_size: u64,
    test_size: u64,
    #[serde(flatten)]
    artifact: Artifact,
}

impl TryFrom<EnvelopeDocument> for ModelEnvelope {
    type Error = ArtifactError;

    fn try_from(d: EnvelopeDocument) -> Result<Self, ArtifactError> {
        if d.format != MODEL_FORMAT || d.version != MODEL_VERSION {
            return Err(ArtifactError::Invalid(format!("unsupported document {} v{}", d.format, d.version)));
        }
        if let Some(a) = d.accuracy {
            if !(0.0..=1.0).contains(&a) {
                return Err(ArtifactError::Invalid(format!("accuracy {a} outside [0, 1]")));
            }
        }
        Ok(ModelEnvelope {
            created_at: d.created_at,
            accuracy: d.accuracy,
            confusion_matrix: d.confusion_matrix,
            train_size: d.train_size,
            test_size: d.test_size,
            artifact: d.artifact,
        })
    }
}

impl From<ModelEnvelope> for EnvelopeDocument {
    fn from(m: ModelEnvelope) -> Self {
        EnvelopeDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            created_at: m.created_at,
            accuracy: m.accuracy,
            confusion_matrix: m.confusion_matrix,
            train_size: m.train_size,
            test_size: m.test_size,
            artifact: m.artifact,
        }
    }
}

impl ModelEnvelope {
    /// Seeded train/test split, CART training on the train part, evaluation
    /// on the held-out part.
    pub fn train_tree(dataset: &Dataset, params: TrainParams, test_fraction: f64, seed: u64) -> Result<Self, ArtifactError> {
        let (train_set, test_set) = split(dataset, test_fraction, seed)?;
        let tree = train(&train_set, params)?;
        let (accuracy, confusion_matrix) = if test_set.is_empty() {
            (None, None)
        } else {
            let cm = evaluate(&tree, &test_set)?;
            (cm.accuracy().ok(), Some(cm))
        };
        Ok(Self {
            created_at: None,
            accuracy,
            confusion_matrix,
            train_size: train_set.len() as u64,
            test_size: test_set.len() as u64,
            artifact: Artifact::Tree(tree),
        })
    }

    pub fn fit_cycles(schema: &Schema, records: &[CycleRecord], config: FitConfig) -> Result<Self, ArtifactError> {
        let (model, _) = fit(schema, records, config)?;
        Ok(Self {
            created_at: None,
            accuracy: None,
            confusion_matrix: None,
            train_size: records.len() as u64,
            test_size: 0,
            artifact: Artifact::Cycles(model),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self.artifact {
            Artifact::Tree(_) => "tree",
            Artifact::Cycles(_) => "cycles",
        }
    }

    pub fn schema(&self) -> &Schema {
        match &self.artifact {
            Artifact::Tree(t) => &t.schema,
            Artifact::Cycles(m) => &m.schema,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ArtifactError> {
        serde_json::from_str(text).map_err(|e| ArtifactError::Invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::synthesize_chd_like;

    #[test]
    fn train_and_round_trip() {
        let data = synthesize_chd_like(1, 600).unwrap().dataset;
        let m = ModelEnvelope::train_tree(&data, TrainParams::default(), DEFAULT_TEST_FRACTION, 1).unwrap();
        assert_eq!(m.test_size, 120);
        assert_eq!(m.kind(), "tree");
        let text = m.to_json();
        assert!(text.contains("\"format\": \"riskweave.model\""));
        assert_eq!(ModelEnvelope::from_json(&text).unwrap(), m);
        assert_eq!(ModelEnvelope::from_json(&text).unwrap().to_json(), text);
        assert!(ModelEnvelope::from_json(&text.replace("riskweave.model", "x")).is_err());
    }
}
