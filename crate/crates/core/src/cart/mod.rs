//! Binary-classification CART with per-node sample counts and a chi-square
//! confidence p-value on every leaf.
//!
//! Splits are binary: categorical features split on `equals(level)` versus
//! the rest, numeric features on `less_than(threshold)`. The true branch of a
//! node is always the side where its predicate holds.
//!
//! Trees serialize to a versioned JSON document:
//!
//! ```json
//! {
//!   "format": "riskweave.tree", "version": 1,
//!   "schema": { ... }, "train_size": 1823, "class_prior": [0.86, 0.14],
//!   "params": { "max_depth": 4, "min_samples_leaf": 5, "min_impurity_decrease": 0.0 },
//!   "confidence": { "null": "uniform", "yates": false },
//!   "feature_gaps": { "Daily alcohol consumption": 1.0 },
//!   "root": {
//!     "kind": "internal",
//!     "predicate": { "feature": "Age", "test": "equals", "level": "75-90" },
//!     "samples": 1823, "counts": [1570, 253],
//!     "if_true": { "kind": "leaf", "label": "high risk", "counts": [12, 205], "samples": 217, "confidence_p": 0.0 },
//!     "if_false": { ... }
//!   }
//! }
//! ```
//!
//! `counts` are ordered like `schema.target.classes`.

mod confidence;
mod split;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use confidence::{leaf_confidence, leaf_confidence_with, ConfidenceConfig, ConfidenceNull};
pub use split::{best_split, gini, Split};

use crate::predicate::{Predicate, PredicateError};
use crate::stats::StatsError;
use crate::tabular::{Dataset, Row, Schema, TabularError, Value};

pub const TREE_FORMAT: &str = "riskweave.tree";
pub const TREE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CartError {
    #[error("class counts are empty")]
    EmptyCounts,
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("instance does not match schema: {0}")]
    SchemaMismatch(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl CartError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyCounts => "EmptyCounts",
            Self::EmptyDataset => "EmptyDataset",
            Self::SchemaMismatch(_) => "SchemaMismatch",
            Self::InvalidTree(_) => "InvalidTree",
            Self::InvalidParams(_) => "InvalidParams",
            Self::Stats(StatsError::InvalidDf) => "InvalidDf",
            Self::Stats(StatsError::InvalidStatistic(_)) => "InvalidStatistic",
        }
    }
}

impl From<TabularError> for CartError {
    fn from(e: TabularError) -> Self {
        CartError::SchemaMismatch(e.to_string())
    }
}

impl From<PredicateError> for CartError {
    fn from(e: PredicateError) -> Self {
        CartError::InvalidTree(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    #[serde(default)]
    pub min_impurity_decrease: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            max_depth: 4,
            min_samples_leaf: 5,
            min_impurity_decrease: 0.0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), CartError> {
        if self.max_depth < 1 {
            return Err(CartError::InvalidParams("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(CartError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if self.min_impurity_decrease.is_nan() || self.min_impurity_decrease < 0.0 {
            return Err(CartError::InvalidParams("min_impurity_decrease must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        predicate: Predicate,
        samples: u64,
        counts: [u64; 2],
        if_true: Box<TreeNode>,
        if_false: Box<TreeNode>,
    },
    Leaf {
        label: String,
        counts: [u64; 2],
        samples: u64,
        confidence_p: f64,
    },
}

impl TreeNode {
    /// Builds a leaf, deriving label (ties go to the positive class),
    /// sample count and confidence from `counts`.
    pub fn leaf(schema: &Schema, counts: [u64; 2], config: ConfidenceConfig, prior: &[f64; 2]) -> Result<Self, CartError> {
        let confidence_p = leaf_confidence_with(&counts, config, prior)?;
        Ok(TreeNode::Leaf {
            label: schema.class_name(majority_class(schema, counts)).to_string(),
            counts,
            samples: counts[0] + counts[1],
            confidence_p,
        })
    }

    pub fn internal(predicate: Predicate, if_true: TreeNode, if_false: TreeNode) -> Self {
        let (a, b) = (if_true.counts(), if_false.counts());
        let counts = [a[0] + b[0], a[1] + b[1]];
        TreeNode::Internal {
            predicate,
            samples: counts[0] + counts[1],
            counts,
            if_true: Box::new(if_true),
            if_false: Box::new(if_false),
        }
    }

    pub fn samples(&self) -> u64 {
        match self {
            TreeNode::Internal { samples, .. } | TreeNode::Leaf { samples, .. } => *samples,
        }
    }

    pub fn counts(&self) -> [u64; 2] {
        match self {
            TreeNode::Internal { counts, .. } | TreeNode::Leaf { counts, .. } => *counts,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { if_true, if_false, .. } => if_true.num_leaves() + if_false.num_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { if_true, if_false, .. } => 1 + if_true.depth().max(if_false.depth()),
        }
    }

    /// Visits every leaf depth-first, true branch first, with the path that leads to it.
    pub fn for_each_leaf<'a>(&'a self, mut visit: impl FnMut(&[PathStep], &'a TreeNode)) {
        fn walk<'a>(node: &'a TreeNode, path: &mut Vec<PathStep>, visit: &mut dyn FnMut(&[PathStep], &'a TreeNode)) {
            match node {
                TreeNode::Leaf { .. } => visit(path, node),
                TreeNode::Internal {
                    predicate,
                    if_true,
                    if_false,
                    ..
                } => {
                    path.push(PathStep {
                        predicate: predicate.clone(),
                        branch: true,
                    });
                    walk(if_true, path, visit);
                    path.last_mut().expect("just pushed").branch = false;
                    walk(if_false, path, visit);
                    path.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut visit);
    }

    fn collect_predicates<'a>(&'a self, out: &mut Vec<&'a Predicate>) {
        if let TreeNode::Internal {
            predicate,
            if_true,
            if_false,
            ..
        } = self
        {
            out.push(predicate);
            if_true.collect_predicates(out);
            if_false.collect_predicates(out);
        }
    }
}

fn majority_class(schema: &Schema, counts: [u64; 2]) -> usize {
    let pos = schema.positive_class();
    if counts[pos] >= counts[1 - pos] {
        pos
    } else {
        1 - pos
    }
}

/// One decision on a root-to-leaf path: the node's predicate and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub predicate: Predicate,
    pub branch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub counts: [u64; 2],
    pub samples: u64,
    pub confidence_p: f64,
    pub path: Vec<PathStep>,
}

impl Prediction {
    /// Share of the leaf's training rows that carry the predicted label.
    pub fn majority_fraction(&self, schema: &Schema) -> f64 {
        let class = schema.class_index(&self.label).unwrap_or(0);
        self.counts[class] as f64 / self.samples as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeDocument", into = "TreeDocument")]
pub struct DecisionTree {
    pub schema: Schema,
    pub train_size: u64,
    pub class_prior: [f64; 2],
    pub params: TrainParams,
    pub confidence: ConfidenceConfig,
    /// Smallest positive gap between distinct training values, per numeric feature.
    pub feature_gaps: BTreeMap<String, f64>,
    pub root: TreeNode,
}

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    format: String,
    version: u32,
    schema: Schema,
    train_size: u64,
    class_prior: [f64; 2],
    params: TrainParams,
    #[serde(default)]
    confidence: ConfidenceConfig,
    #[serde(default)]
    feature_gaps: BTreeMap<String, f64>,
    root: TreeNode,
}

impl TryFrom<TreeDocument> for DecisionTree {
    type Error = CartError;

    fn try_from(doc: TreeDocument) -> Result<Self, CartError> {
        if doc.format != TREE_FORMAT || doc.version != TREE_VERSION {
            return Err(CartError::InvalidTree(format!(
                "unsupported document {} v{}",
                doc.format, doc.version
            )));
        }
        let tree = DecisionTree {
            schema: doc.schema,
            train_size: doc.train_size,
            class_prior: doc.class_prior,
            params: doc.params,
            confidence: doc.confidence,
            feature_gaps: doc.feature_gaps,
            root: doc.root,
        };
        tree.validate()?;
        Ok(tree)
    }
}

impl From<DecisionTree> for TreeDocument {
    fn from(t: DecisionTree) -> Self {
        TreeDocument {
            format: TREE_FORMAT.into(),
            version: TREE_VERSION,
            schema: t.schema,
            train_size: t.train_size,
            class_prior: t.class_prior,
            params: t.params,
            confidence: t.confidence,
            feature_gaps: t.feature_gaps,
            root: t.root,
        }
    }
}

impl DecisionTree {
    /// Wraps a hand-built root. Train size and class prior are taken from the root.
    pub fn from_root(schema: Schema, root: TreeNode, params: TrainParams, confidence: ConfidenceConfig) -> Result<Self, CartError> {
        let counts = root.counts();
        let n = counts[0] + counts[1];
        let tree = DecisionTree {
            schema,
            train_size: n,
            class_prior: prior_of(counts),
            params,
            confidence,
            feature_gaps: BTreeMap::new(),
            root,
        };
        tree.validate()?;
        Ok(tree)
    }

    /// Checks the structural invariants: sample bookkeeping, leaf labels,
    /// confidence range and predicates against the schema.
    pub fn validate(&self) -> Result<(), CartError> {
        fn check(node: &TreeNode, schema: &Schema) -> Result<(), CartError> {
            match node {
                TreeNode::Leaf {
                    label,
                    counts,
                    samples,
                    confidence_p,
                } => {
                    if counts[0] + counts[1] != *samples || *samples == 0 {
                        return Err(CartError::InvalidTree("leaf samples must equal the sum of its counts".into()));
                    }
                    if schema.class_index(label) != Some(majority_class(schema, *counts)) {
                        return Err(CartError::InvalidTree(format!("leaf label `{label}` is not the majority class")));
                    }
                    if !(0.0..=1.0).contains(confidence_p) {
                        return Err(CartError::InvalidTree("confidence_p outside [0, 1]".into()));
                    }
                }
                TreeNode::Internal {
                    predicate,
                    samples,
                    counts,
                    if_true,
                    if_false,
                } => {
                    predicate.validate(schema)?;
                    let (a, b) = (if_true.counts(), if_false.counts());
                    if *counts != [a[0] + b[0], a[1] + b[1]] || *samples != if_true.samples() + if_false.samples() {
                        return Err(CartError::InvalidTree("internal node samples must equal the sum over children".into()));
                    }
                    check(if_true, schema)?;
                    check(if_false, schema)?;
                }
            }
            Ok(())
        }
        check(&self.root, &self.schema)?;
        if self.root.samples() != self.train_size {
            return Err(CartError::InvalidTree("root samples must equal train_size".into()));
        }
        let prior_sum = self.class_prior[0] + self.class_prior[1];
        if (prior_sum - 1.0).abs() > 1e-9 {
            return Err(CartError::InvalidTree("class prior must sum to 1".into()));
        }
        Ok(())
    }

    /// Names of the features used by at least one internal node, in schema order.
    pub fn used_features(&self) -> Vec<&str> {
        let mut preds = Vec::new();
        self.root.collect_predicates(&mut preds);
        self.schema
            .features
            .iter()
            .map(|f| f.name.as_str())
            .filter(|name| preds.iter().any(|p| p.feature == *name))
            .collect()
    }

    pub fn predicates(&self) -> Vec<&Predicate> {
        let mut preds = Vec::new();
        self.root.collect_predicates(&mut preds);
        preds
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CartError> {
        serde_json::from_str(text).map_err(|e| CartError::InvalidTree(e.to_string()))
    }
}

fn prior_of(counts: [u64; 2]) -> [f64; 2] {
    let n = (counts[0] + counts[1]) as f64;
    let p0 = counts[0] as f64 / n;
    [p0, 1.0 - p0]
}

/// Grows a tree by recursive greedy splitting with the default confidence settings.
pub fn train(dataset: &Dataset, params: TrainParams) -> Result<DecisionTree, CartError> {
    train_with(dataset, params, ConfidenceConfig::default())
}

pub fn train_with(dataset: &Dataset, params: TrainParams, confidence: ConfidenceConfig) -> Result<DecisionTree, CartError> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(CartError::EmptyDataset);
    }
    let schema = &dataset.schema;
    let counts = dataset.class_counts();
    let prior = prior_of(counts);
    let builder = Builder {
        rows: &dataset.rows,
        schema,
        params: &params,
        confidence,
        prior,
    };
    let all: Vec<usize> = (0..dataset.len()).collect();
    let root = builder.grow(&all, 0)?;
    Ok(DecisionTree {
        schema: schema.clone(),
        train_size: dataset.len() as u64,
        class_prior: prior,
        params,
        confidence,
        feature_gaps: feature_gaps(dataset),
        root,
    })
}

struct Builder<'a> {
    rows: &'a [Row],
    schema: &'a Schema,
    params: &'a TrainParams,
    confidence: ConfidenceConfig,
    prior: [f64; 2],
}

impl Builder<'_> {
    fn grow(&self, subset: &[usize], depth: usize) -> Result<TreeNode, CartError> {
        let mut counts = [0u64; 2];
        for &i in subset {
            counts[self.rows[i].label] += 1;
        }
        let leaf = || TreeNode::leaf(self.schema, counts, self.confidence, &self.prior);
        if depth >= self.params.max_depth || counts[0] == 0 || counts[1] == 0 {
            return leaf();
        }
        let Some(split) = split::best_split_of(self.rows, subset, self.schema, self.params) else {
            return leaf();
        };
        let index = self.schema.feature_index(&split.predicate.feature).expect("split feature in schema");
        let (yes, no): (Vec<usize>, Vec<usize>) = subset
            .iter()
            .partition(|&&i| split.predicate.holds_value(self.schema, index, &self.rows[i].values[index]));
        Ok(TreeNode::internal(
            split.predicate,
            self.grow(&yes, depth + 1)?,
            self.grow(&no, depth + 1)?,
        ))
    }
}

fn feature_gaps(dataset: &Dataset) -> BTreeMap<String, f64> {
    let mut gaps = BTreeMap::new();
    for (f, spec) in dataset.schema.features.iter().enumerate() {
        if !spec.is_numeric() {
            continue;
        }
        let mut xs: Vec<f64> = dataset.rows.iter().filter_map(|r| r.values[f].as_f64()).collect();
        xs.sort_by(f64::total_cmp);
        let gap = xs.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
        if gap.is_finite() {
            gaps.insert(spec.name.clone(), gap);
        }
    }
    gaps
}

/// Walks from the root to a leaf, recording every predicate and branch taken.
pub fn predict(tree: &DecisionTree, instance: &[Value]) -> Result<Prediction, CartError> {
    tree.schema.check_instance(instance)?;
    let mut node = &tree.root;
    let mut path = Vec::new();
    loop {
        match node {
            TreeNode::Internal {
                predicate,
                if_true,
                if_false,
                ..
            } => {
                let branch = predicate.holds(&tree.schema, instance);
                path.push(PathStep {
                    predicate: predicate.clone(),
                    branch,
                });
                node = if branch { if_true } else { if_false };
            }
            TreeNode::Leaf {
                label,
                counts,
                samples,
                confidence_p,
            } => {
                return Ok(Prediction {
                    label: label.clone(),
                    counts: *counts,
                    samples: *samples,
                    confidence_p: *confidence_p,
                    path,
                })
            }
        }
    }
}
