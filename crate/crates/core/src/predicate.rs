use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tabular::{FeatureKind, Schema, Value};

/// A binary test on one feature, as stored in tree nodes and decision paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature: String,
    #[serde(flatten)]
    pub test: Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Test {
    Equals { level: String },
    NotEquals { level: String },
    LessThan { threshold: f64 },
    GreaterOrEqual { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredicateError {
    #[error("predicate refers to unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("level `{level}` is not declared for feature `{feature}`")]
    UnknownLevel { feature: String, level: String },
    #[error("predicate on `{0}` does not match the feature kind")]
    KindMismatch(String),
    #[error("threshold on `{0}` is not finite")]
    NonFiniteThreshold(String),
}

impl Predicate {
    pub fn equals(feature: impl Into<String>, level: impl Into<String>) -> Self {
        Self {
            feature: feature.into(),
            test: Test::Equals {
                level: level.into(),
            },
        }
    }

    pub fn not_equals(feature: impl Into<String>, level: impl Into<String>) -> Self {
        Self {
            feature: feature.into(),
            test: Test::NotEquals {
                level: level.into(),
            },
        }
    }

    pub fn less_than(feature: impl Into<String>, threshold: f64) -> Self {
        Self {
            feature: feature.into(),
            test: Test::LessThan { threshold },
        }
    }

    pub fn greater_or_equal(feature: impl Into<String>, threshold: f64) -> Self {
        Self {
            feature: feature.into(),
            test: Test::GreaterOrEqual { threshold },
        }
    }

    /// Checks the predicate against a schema and returns the feature index.
    pub fn validate(&self, schema: &Schema) -> Result<usize, PredicateError> {
        let index = schema
            .feature_index(&self.feature)
            .ok_or_else(|| PredicateError::UnknownFeature(self.feature.clone()))?;
        match (&self.test, &schema.features[index].kind) {
            (Test::Equals { level } | Test::NotEquals { level }, FeatureKind::Categorical { levels }) => {
                if !levels.iter().any(|l| l == level) {
                    return Err(PredicateError::UnknownLevel {
                        feature: self.feature.clone(),
                        level: level.clone(),
                    });
                }
            }
            (Test::LessThan { threshold } | Test::GreaterOrEqual { threshold }, FeatureKind::Numeric { .. }) => {
                if !threshold.is_finite() {
                    return Err(PredicateError::NonFiniteThreshold(self.feature.clone()));
                }
            }
            _ => return Err(PredicateError::KindMismatch(self.feature.clone())),
        }
        Ok(index)
    }

    /// Evaluates the predicate on a schema-conforming instance.
    ///
    /// The predicate must already have been validated against `schema`.
    pub fn holds(&self, schema: &Schema, instance: &[Value]) -> bool {
        let index = schema
            .feature_index(&self.feature)
            .expect("predicate validated against schema");
        self.holds_value(schema, index, &instance[index])
    }

    pub(crate) fn holds_value(&self, schema: &Schema, index: usize, value: &Value) -> bool {
        match (&self.test, value) {
            (Test::Equals { level }, Value::Categorical(v)) => schema.level_name(index, *v) == Some(level.as_str()),
            (Test::NotEquals { level }, Value::Categorical(v)) => schema.level_name(index, *v) != Some(level.as_str()),
            (Test::LessThan { threshold }, Value::Numeric(x)) => x < threshold,
            (Test::GreaterOrEqual { threshold }, Value::Numeric(x)) => x >= threshold,
            _ => false,
        }
    }

    /// The predicate describing the other branch of the same split.
    pub fn negated(&self) -> Self {
        let test = match &self.test {
            Test::Equals { level } => Test::NotEquals { level: level.clone() },
            Test::NotEquals { level } => Test::Equals { level: level.clone() },
            Test::LessThan { threshold } => Test::GreaterOrEqual {
                threshold: *threshold,
            },
            Test::GreaterOrEqual { threshold } => Test::LessThan {
                threshold: *threshold,
            },
        };
        Self {
            feature: self.feature.clone(),
            test,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.test {
            Test::Equals { level } => write!(f, "{} = {}", self.feature, level),
            Test::NotEquals { level } => write!(f, "{} \u{2260} {}", self.feature, level),
            Test::LessThan { threshold } => write!(f, "{} < {}", self.feature, threshold),
            Test::GreaterOrEqual { threshold } => write!(f, "{} \u{2265} {}", self.feature, threshold),
        }
    }
}
