//! Request parsing and response bodies shared by the CLI (`--json`) and the
//! HTTP service, so both front ends emit the same documents.

use serde::{Deserialize, Serialize};

use crate::artifact::{Artifact, ArtifactError, ModelEnvelope};
use crate::cart::{predict, CartError, DecisionTree};
use crate::cycles::{narrate_curve, predict_curve, CycleModel, CyclesError};
use crate::metrics::{ConfusionMatrix, MetricsError};
use crate::narrate::{
    coverage_report, decision_path_conditions, global_summary, narrate_prediction, render_condition, what_if_with,
    Condition, CoverageReport, Explanation, NarrateError, Narrator, WhatIfOptions,
};
use crate::tabular::{Schema, TabularError, Value};
use crate::verbal::{format_probability, verbalize, ProbabilityStyle, VerbalError};

/// Body keys that carry request options rather than feature values.
pub const RESERVED_KEYS: [&str; 4] = ["features", "target_label", "asserted", "n_cycles"];

/// Accuracy assumed for a tree whose file records none: the most hedged band.
pub const UNKNOWN_ACCURACY: f64 = 0.0;

/// A failure with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub code: String,
    pub detail: String,
    pub row: Option<usize>,
    pub column: Option<String>,
}

impl ApiError {
    pub fn new(code: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            detail: detail.into(),
            row: None,
            column: None,
        }
    }

    pub fn unknown_model(id: &str) -> Self {
        Self::new("UnknownModel", format!("no model with id `{id}`"))
    }

    /// `{error, detail, context}`; `row`/`column` also appear at top level
    /// when the error points into an uploaded file.
    pub fn to_json(&self) -> serde_json::Value {
        let mut context = serde_json::Map::new();
        let mut body = serde_json::Map::new();
        body.insert("error".into(), self.code.clone().into());
        body.insert("detail".into(), self.detail.clone().into());
        if let Some(row) = self.row {
            context.insert("row".into(), row.into());
            body.insert("row".into(), row.into());
        }
        if let Some(column) = &self.column {
            context.insert("column".into(), column.clone().into());
            body.insert("column".into(), column.clone().into());
        }
        body.insert("context".into(), context.into());
        body.into()
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

impl std::error::Error for ApiError {}

impl From<TabularError> for ApiError {
    fn from(e: TabularError) -> Self {
        let (row, column) = e.location();
        let (row, column) = (row, column.map(str::to_string));
        Self {
            code: e.code().into(),
            detail: e.to_string(),
            row,
            column,
        }
    }
}

macro_rules! api_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                Self::new(e.code(), e.to_string())
            }
        }
    )*};
}

api_error_from!(CartError, MetricsError, VerbalError, NarrateError, CyclesError, ArtifactError);

fn tree_of(model: &ModelEnvelope) -> Result<&DecisionTree, ApiError> {
    match &model.artifact {
        Artifact::Tree(t) => Ok(t),
        Artifact::Cycles(_) => Err(ApiError::new("WrongModelKind", "this operation needs a decision-tree model")),
    }
}

fn cycles_of(model: &ModelEnvelope) -> Result<&CycleModel, ApiError> {
    match &model.artifact {
        Artifact::Cycles(m) => Ok(m),
        Artifact::Tree(_) => Err(ApiError::new("WrongModelKind", "this operation needs a cycle model")),
    }
}

fn accuracy_of(model: &ModelEnvelope) -> f64 {
    model.accuracy.unwrap_or(UNKNOWN_ACCURACY)
}

/// Reads the feature record from a request body: either nested under
/// `"features"` or given flat alongside the reserved option keys.
pub fn parse_instance(schema: &Schema, body: &serde_json::Value) -> Result<Vec<Value>, ApiError> {
    let object = body
        .as_object()
        .ok_or_else(|| ApiError::new("SchemaMismatch", "request body must be a JSON object"))?;
    let features = match object.get("features") {
        Some(serde_json::Value::Object(inner)) => inner.clone(),
        Some(_) => return Err(ApiError::new("SchemaMismatch", "`features` must be an object")),
        None => object
            .iter()
            .filter(|(k, _)| !RESERVED_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    };
    Ok(schema.instance_from_json(&features)?)
}

fn string_field(body: &serde_json::Value, key: &str) -> Result<Option<String>, ApiError> {
    match body.get(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(ApiError::new("SchemaMismatch", format!("`{key}` must be a string"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub label: String,
    pub confidence_p: f64,
    pub samples: u64,
    /// Training rows in the leaf per class, in schema class order.
    pub counts: [u64; 2],
    pub certainty_phrase: String,
    pub accuracy: Option<f64>,
    /// Merged decision-path conditions.
    pub path: Vec<Condition>,
}

pub fn predict_response(model: &ModelEnvelope, instance: &[Value], narrator: &Narrator) -> Result<PredictResponse, ApiError> {
    let tree = tree_of(model)?;
    let p = predict(tree, instance)?;
    Ok(PredictResponse {
        certainty_phrase: verbalize(&narrator.map, accuracy_of(model), p.confidence_p)?,
        path: decision_path_conditions(&p.path),
        label: p.label,
        confidence_p: p.confidence_p,
        samples: p.samples,
        counts: p.counts,
        accuracy: model.accuracy,
    })
}

pub fn explain_response(model: &ModelEnvelope, instance: &[Value], narrator: &Narrator) -> Result<Explanation, ApiError> {
    let tree = tree_of(model)?;
    let p = predict(tree, instance)?;
    Ok(narrate_prediction(&tree.schema, &p, accuracy_of(model), &narrator.map, &narrator.templates)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeBody {
    pub feature: String,
    pub from: serde_json::Value,
    pub to: serde_json::Value,
    /// The condition the new value satisfies, rendered for display.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub target_label: String,
    pub current_label: String,
    /// False when no reachable leaf carries the target label.
    pub found: bool,
    pub changes: Vec<ChangeBody>,
    pub new_label: Option<String>,
    pub new_confidence_p: Option<f64>,
    pub new_samples: Option<u64>,
    pub new_certainty_phrase: Option<String>,
}

/// `target_label` defaults to the class the instance is not currently predicted as.
pub fn whatif_response(
    model: &ModelEnvelope,
    instance: &[Value],
    target_label: Option<&str>,
    narrator: &Narrator,
) -> Result<WhatIfResponse, ApiError> {
    let tree = tree_of(model)?;
    let schema = &tree.schema;
    let current = predict(tree, instance)?;
    let target = match target_label {
        Some(t) => t.to_string(),
        None => {
            let class = schema.class_index(&current.label).unwrap_or(0);
            schema.class_name(1 - class).to_string()
        }
    };
    let found = what_if_with(tree, instance, &target, &WhatIfOptions::default())?;
    let mut response = WhatIfResponse {
        target_label: target,
        current_label: current.label,
        found: found.is_some(),
        changes: Vec::new(),
        new_label: None,
        new_confidence_p: None,
        new_samples: None,
        new_certainty_phrase: None,
    };
    if let Some(cf) = found {
        let moved = cf.apply(schema, instance);
        let landed = predict(tree, &moved)?;
        let conditions = decision_path_conditions(&landed.path);
        for change in &cf.changes {
            let f = schema.feature_index(&change.feature).expect("counterfactual names schema features");
            let text = match conditions.iter().find(|c| c.feature == change.feature) {
                Some(c) => render_condition(schema, &narrator.templates, c)?,
                None => change.feature.clone(),
            };
            response.changes.push(ChangeBody {
                feature: change.feature.clone(),
                from: schema.value_to_json(f, &change.from),
                to: schema.value_to_json(f, &change.to),
                text,
            });
        }
        response.new_certainty_phrase = Some(verbalize(&narrator.map, accuracy_of(model), cf.new_confidence_p)?);
        response.new_label = Some(cf.new_label);
        response.new_confidence_p = Some(cf.new_confidence_p);
        response.new_samples = Some(cf.new_samples);
    }
    Ok(response)
}

pub fn coverage_response(model: &ModelEnvelope, asserted: &[String], narrator: &Narrator) -> Result<CoverageReport, ApiError> {
    Ok(coverage_report(model.schema(), asserted, &narrator.lexicon, &narrator.templates)?)
}

/// Asserted attributes from a request body's `"asserted"` array.
pub fn parse_asserted(body: &serde_json::Value) -> Result<Vec<String>, ApiError> {
    match body.get("asserted") {
        None | Some(serde_json::Value::Null) => Ok(Vec::new()),
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| ApiError::new("SchemaMismatch", "`asserted` must be an array of strings"))
            })
            .collect(),
        Some(_) => Err(ApiError::new("SchemaMismatch", "`asserted` must be an array of strings")),
    }
}

pub fn parse_target_label(body: &serde_json::Value) -> Result<Option<String>, ApiError> {
    string_field(body, "target_label")
}

pub fn parse_n_cycles(body: &serde_json::Value) -> Result<Option<usize>, ApiError> {
    match body.get("n_cycles") {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| ApiError::new("SchemaMismatch", "`n_cycles` must be a non-negative integer")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cycle: usize,
    pub conditional_p: f64,
    pub cumulative_p: f64,
    pub percentage: String,
    pub natural_frequency: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResponse {
    pub outcome: String,
    pub points: Vec<CurvePoint>,
    /// Narrative for the last cycle.
    pub text: String,
}

/// Lower-case name of the target, used as the outcome phrase ("live birth").
pub fn outcome_phrase(schema: &Schema) -> String {
    schema.target.name.to_lowercase()
}

/// `n_cycles` defaults to the number of cycles the model was fitted on.
pub fn curve_response(model: &ModelEnvelope, instance: &[Value], n_cycles: Option<usize>, narrator: &Narrator) -> Result<CurveResponse, ApiError> {
    let m = cycles_of(model)?;
    let n = n_cycles.unwrap_or_else(|| m.max_cycles());
    let curve = predict_curve(m, instance, n)?;
    let outcome = outcome_phrase(&m.schema);
    let points = (1..=curve.len())
        .map(|t| {
            let c = curve.cumulative[t - 1];
            Ok(CurvePoint {
                cycle: t,
                conditional_p: curve.conditional[t - 1],
                cumulative_p: c,
                percentage: format_probability(c, &ProbabilityStyle::Percentage)?,
                natural_frequency: format_probability(c, &ProbabilityStyle::NaturalFrequency { base: 100 })?,
                text: narrate_curve(&curve, t, &outcome, &narrator.templates)?,
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    let text = points.last().map(|p| p.text.clone()).unwrap_or_default();
    Ok(CurveResponse { outcome, points, text })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResponse {
    pub model_id: String,
    pub kind: String,
    pub accuracy: Option<f64>,
    pub confusion_matrix: Option<ConfusionMatrix>,
    pub train_size: u64,
    pub test_size: u64,
}

impl TrainResponse {
    pub fn new(model_id: impl Into<String>, model: &ModelEnvelope) -> Self {
        Self {
            model_id: model_id.into(),
            kind: model.kind().into(),
            accuracy: model.accuracy,
            confusion_matrix: model.confusion_matrix,
            train_size: model.train_size,
            test_size: model.test_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub kind: String,
    pub created_at: Option<String>,
    pub accuracy: Option<f64>,
    pub confusion_matrix: Option<ConfusionMatrix>,
    pub train_size: u64,
    pub test_size: u64,
    pub schema: Schema,
    /// Features the model actually consults.
    pub features_used: Vec<String>,
    /// Plain-language overview of the whole model (trees only).
    pub summary: Option<String>,
}

pub fn model_info(model_id: &str, model: &ModelEnvelope, narrator: &Narrator) -> Result<ModelInfo, ApiError> {
    let (features_used, summary) = match &model.artifact {
        Artifact::Tree(t) => {
            let s = global_summary(t, accuracy_of(model), &narrator.map, &narrator.templates)?;
            (t.used_features().into_iter().map(str::to_string).collect(), Some(s.text))
        }
        Artifact::Cycles(m) => (m.schema.features.iter().map(|f| f.name.clone()).collect(), None),
    };
    Ok(ModelInfo {
        model_id: model_id.into(),
        kind: model.kind().into(),
        created_at: model.created_at.clone(),
        accuracy: model.accuracy,
        confusion_matrix: model.confusion_matrix,
        train_size: model.train_size,
        test_size: model.test_size,
        schema: model.schema().clone(),
        features_used,
        summary,
    })
}
