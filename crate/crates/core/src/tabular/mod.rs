//! Schema-aware tabular data: feature declarations, records, CSV ingestion,
//! seeded splitting and the synthetic CHD-like generator.

mod csv_io;
mod schema_file;
mod split;
mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use csv_io::{infer_schema, parse_csv, to_csv};
pub use schema_file::{parse_schema_text, schema_to_text};
pub use split::split;
pub use synth::{
    chd_planted_label, chd_schema, synthesize_chd_like, synthesize_chd_like_with, PlantedRule, SynthConfig,
    SyntheticData, AGE, ALCOHOL, BMI, CHOLESTEROL_HDL, CHD_TARGET,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TabularError {
    #[error("file has no data rows")]
    EmptyFile,
    #[error("column `{0}` is not part of the schema")]
    UnknownColumn(String),
    #[error("column `{0}` is required by the schema but absent")]
    MissingColumn(String),
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("row {row}, column `{column}`: value `{value}` is outside the declared domain")]
    ValueOutOfDomain { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: {detail}")]
    MalformedRow { row: usize, detail: String },
    #[error("target column must have exactly two classes, found {found}")]
    TargetNotBinary { found: usize },
    #[error("test fraction {0} is outside (0, 1)")]
    FractionOutOfRange(f64),
    #[error("need at least {min} rows, got {n}")]
    TooFewRows { n: usize, min: usize },
    #[error("synthetic generation needs n >= 100, got {0}")]
    NTooSmall(usize),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("instance does not match schema: {0}")]
    SchemaMismatch(String),
}

impl TabularError {
    /// Stable machine-readable code, used by the CLI and HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyFile => "EmptyFile",
            Self::UnknownColumn(_) => "UnknownColumn",
            Self::MissingColumn(_) => "MissingColumn",
            Self::DuplicateColumn(_) => "DuplicateColumn",
            Self::ValueOutOfDomain { .. } => "ValueOutOfDomain",
            Self::MissingValue { .. } => "MissingValue",
            Self::MalformedRow { .. } => "MalformedRow",
            Self::TargetNotBinary { .. } => "TargetNotBinary",
            Self::FractionOutOfRange(_) => "FractionOutOfRange",
            Self::TooFewRows { .. } => "TooFewRows",
            Self::NTooSmall(_) => "NTooSmall",
            Self::InvalidSchema(_) => "InvalidSchema",
            Self::SchemaMismatch(_) => "SchemaMismatch",
        }
    }

    /// Row (1-based, header excluded) and column the error points at, if any.
    pub fn location(&self) -> (Option<usize>, Option<&str>) {
        match self {
            Self::ValueOutOfDomain { row, column, .. } | Self::MissingValue { row, column } => {
                (Some(*row), Some(column))
            }
            Self::MalformedRow { row, .. } => (Some(*row), None),
            Self::UnknownColumn(c) | Self::MissingColumn(c) | Self::DuplicateColumn(c) => (None, Some(c)),
            _ => (None, None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical { levels: Vec<String> },
    Numeric { unit: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    /// Reserved. Empty cells are rejected at parse time regardless of this flag.
    #[serde(default)]
    pub allow_missing: bool,
}

impl FeatureSpec {
    pub fn categorical<I, S>(name: impl Into<String>, levels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
            allow_missing: false,
        }
    }

    pub fn numeric(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric { unit: unit.into() },
            allow_missing: false,
        }
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.kind {
            FeatureKind::Categorical { levels } => Some(levels),
            FeatureKind::Numeric { .. } => None,
        }
    }

    pub fn unit(&self) -> Option<&str> {
        match &self.kind {
            FeatureKind::Numeric { unit } => Some(unit),
            FeatureKind::Categorical { .. } => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric { .. })
    }
}

/// Binary target column. `positive` names the class treated as "high risk".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub classes: [String; 2],
    pub positive: String,
}

impl TargetSpec {
    pub fn new(name: impl Into<String>, classes: [&str; 2], positive: &str) -> Self {
        Self {
            name: name.into(),
            classes: classes.map(String::from),
            positive: positive.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    pub target: TargetSpec,
    positive_index: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    features: Vec<FeatureSpec>,
    target: TargetSpec,
}

impl TryFrom<RawSchema> for Schema {
    type Error = TabularError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        Schema::new(raw.features, raw.target)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            features: s.features,
            target: s.target,
        }
    }
}

impl Schema {
    pub fn new(features: Vec<FeatureSpec>, target: TargetSpec) -> Result<Self, TabularError> {
        let invalid = |msg: String| Err(TabularError::InvalidSchema(msg));
        if features.is_empty() {
            return invalid("schema declares no features".into());
        }
        for (i, f) in features.iter().enumerate() {
            if f.name.is_empty() {
                return invalid(format!("feature {i} has an empty name"));
            }
            if features[..i].iter().any(|g| g.name == f.name) {
                return invalid(format!("feature `{}` declared twice", f.name));
            }
            match &f.kind {
                FeatureKind::Categorical { levels } => {
                    if levels.is_empty() {
                        return invalid(format!("feature `{}` has no levels", f.name));
                    }
                    for (j, l) in levels.iter().enumerate() {
                        if l.is_empty() || levels[..j].contains(l) {
                            return invalid(format!("feature `{}` has an empty or repeated level", f.name));
                        }
                    }
                }
                FeatureKind::Numeric { .. } => {}
            }
        }
        if target.name.is_empty() || features.iter().any(|f| f.name == target.name) {
            return invalid("target name must be non-empty and distinct from feature names".into());
        }
        if target.classes[0].is_empty() || target.classes[0] == target.classes[1] {
            return Err(TabularError::TargetNotBinary {
                found: if target.classes[0] == target.classes[1] { 1 } else { 2 },
            });
        }
        let Some(positive_index) = target.classes.iter().position(|c| *c == target.positive) else {
            return invalid(format!("positive class `{}` is not one of the target classes", target.positive));
        };
        Ok(Self {
            features,
            target,
            positive_index,
        })
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn level_name(&self, feature: usize, level: usize) -> Option<&str> {
        self.features[feature].levels()?.get(level).map(String::as_str)
    }

    pub fn level_index(&self, feature: usize, level: &str) -> Option<usize> {
        self.features[feature].levels()?.iter().position(|l| l == level)
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.target.classes.iter().position(|c| c == label)
    }

    pub fn class_name(&self, class: usize) -> &str {
        &self.target.classes[class]
    }

    /// Index of the "high risk" class in `target.classes`.
    pub fn positive_class(&self) -> usize {
        self.positive_index
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// Converts a JSON object (`{"feature name": value, ...}`) into an instance.
    ///
    /// Categorical values must be strings naming a declared level; numeric
    /// values must be finite JSON numbers. A key equal to the target name is
    /// ignored; any other unknown key is rejected.
    pub fn instance_from_json(&self, object: &serde_json::Map<String, serde_json::Value>) -> Result<Vec<Value>, TabularError> {
        let mismatch = |msg: String| TabularError::SchemaMismatch(msg);
        for key in object.keys() {
            if *key != self.target.name && self.feature_index(key).is_none() {
                return Err(mismatch(format!("unknown feature `{key}`")));
            }
        }
        self.features
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let raw = object
                    .get(&f.name)
                    .ok_or_else(|| mismatch(format!("missing feature `{}`", f.name)))?;
                match (&f.kind, raw) {
                    (FeatureKind::Categorical { .. }, serde_json::Value::String(s)) => self
                        .level_index(i, s)
                        .map(Value::Categorical)
                        .ok_or_else(|| mismatch(format!("`{s}` is not a level of `{}`", f.name))),
                    (FeatureKind::Numeric { .. }, serde_json::Value::Number(n)) => match n.as_f64() {
                        Some(x) if x.is_finite() => Ok(Value::Numeric(x)),
                        _ => Err(mismatch(format!("`{}` must be a finite number", f.name))),
                    },
                    (FeatureKind::Categorical { .. }, _) => Err(mismatch(format!("`{}` must be a string level", f.name))),
                    (FeatureKind::Numeric { .. }, _) => Err(mismatch(format!("`{}` must be a number", f.name))),
                }
            })
            .collect()
    }

    /// Inverse of [`Schema::instance_from_json`]; keys are emitted in sorted order.
    pub fn instance_to_json(&self, instance: &[Value]) -> serde_json::Map<String, serde_json::Value> {
        let sorted: BTreeMap<&str, serde_json::Value> = self
            .features
            .iter()
            .zip(instance)
            .enumerate()
            .map(|(i, (f, v))| (f.name.as_str(), self.value_to_json(i, v)))
            .collect();
        sorted.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn value_to_json(&self, feature: usize, value: &Value) -> serde_json::Value {
        match value {
            Value::Categorical(l) => serde_json::Value::String(self.level_name(feature, *l).unwrap_or("").to_string()),
            Value::Numeric(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
        }
    }

    /// Checks arity and per-feature kinds/domains of an instance.
    pub fn check_instance(&self, instance: &[Value]) -> Result<(), TabularError> {
        if instance.len() != self.features.len() {
            return Err(TabularError::SchemaMismatch(format!(
                "expected {} values, got {}",
                self.features.len(),
                instance.len()
            )));
        }
        for (f, v) in self.features.iter().zip(instance) {
            let ok = match (&f.kind, v) {
                (FeatureKind::Categorical { levels }, Value::Categorical(l)) => *l < levels.len(),
                (FeatureKind::Numeric { .. }, Value::Numeric(x)) => x.is_finite(),
                _ => false,
            };
            if !ok {
                return Err(TabularError::SchemaMismatch(format!("bad value for `{}`", f.name)));
            }
        }
        Ok(())
    }
}

/// One cell. Categorical values are level indices into the feature's
/// declared levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Categorical(usize),
    Numeric(f64),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Numeric(x) => Some(*x),
            Value::Categorical(_) => None,
        }
    }

    pub fn as_level(&self) -> Option<usize> {
        match self {
            Value::Categorical(l) => Some(*l),
            Value::Numeric(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<Value>,
    /// Index into `schema.target.classes`.
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Row>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Row>, provenance: impl Into<String>) -> Result<Self, TabularError> {
        for (i, r) in rows.iter().enumerate() {
            schema.check_instance(&r.values).map_err(|e| TabularError::MalformedRow {
                row: i + 1,
                detail: e.to_string(),
            })?;
            if r.label > 1 {
                return Err(TabularError::MalformedRow {
                    row: i + 1,
                    detail: "label index out of range".into(),
                });
            }
        }
        Ok(Self {
            schema,
            rows,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [u64; 2] {
        let mut counts = [0u64; 2];
        for r in &self.rows {
            counts[r.label] += 1;
        }
        counts
    }
}
