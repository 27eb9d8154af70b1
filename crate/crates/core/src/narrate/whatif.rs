use serde::{Deserialize, Serialize};

use super::conditions::{decision_path_conditions, Condition, ConditionKind};
use super::NarrateError;
use crate::cart::{DecisionTree, TreeNode};
use crate::tabular::{Schema, Value};

/// Used when the tree carries no observed gap for a numeric feature.
const FALLBACK_GAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub feature: String,
    pub from: Value,
    pub to: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    /// In schema feature order.
    pub changes: Vec<Change>,
    pub new_label: String,
    pub new_confidence_p: f64,
    pub new_samples: u64,
}

impl Counterfactual {
    pub fn apply(&self, schema: &Schema, instance: &[Value]) -> Vec<Value> {
        let mut out = instance.to_vec();
        for c in &self.changes {
            if let Some(i) = schema.feature_index(&c.feature) {
                out[i] = c.to;
            }
        }
        out
    }

    /// JSON with level names in place of level indices.
    pub fn to_json(&self, schema: &Schema) -> serde_json::Value {
        let changes: Vec<serde_json::Value> = self
            .changes
            .iter()
            .map(|c| {
                let i = schema.feature_index(&c.feature).expect("change names a schema feature");
                serde_json::json!({
                    "feature": c.feature,
                    "from": schema.value_to_json(i, &c.from),
                    "to": schema.value_to_json(i, &c.to),
                })
            })
            .collect();
        serde_json::json!({
            "changes": changes,
            "new_label": self.new_label,
            "new_confidence_p": self.new_confidence_p,
            "new_samples": self.new_samples,
        })
    }
}

/// Which features a counterfactual may not touch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WhatIfOptions {
    /// `None` applies [`default_immutable`].
    pub immutable_features: Option<Vec<String>>,
}

/// Features whose name contains the word "age" (case-insensitive): a person
/// cannot choose a different age.
pub fn default_immutable(schema: &Schema) -> Vec<String> {
    schema
        .features
        .iter()
        .filter(|f| {
            f.name
                .split(|c: char| !c.is_alphanumeric())
                .any(|w| w.eq_ignore_ascii_case("age"))
        })
        .map(|f| f.name.clone())
        .collect()
}

pub fn what_if(tree: &DecisionTree, instance: &[Value], target_label: &str) -> Result<Option<Counterfactual>, NarrateError> {
    what_if_with(tree, instance, target_label, &WhatIfOptions::default())
}

/// Smallest set of feature changes that lands the instance in a leaf with
/// `target_label`.
///
/// Each target leaf is reduced to its merged path conditions; features whose
/// current value already satisfies a condition stay put, the rest move to a
/// representative value (the required level, the first allowed level, the
/// interval midpoint, or one observed gap past an open boundary). Leaves that
/// need an immutable feature changed, or whose conditions are contradictory,
/// are skipped. Ties on change count go to more samples, then smaller p, then
/// depth-first order.
pub fn what_if_with(
    tree: &DecisionTree,
    instance: &[Value],
    target_label: &str,
    options: &WhatIfOptions,
) -> Result<Option<Counterfactual>, NarrateError> {
    let schema = &tree.schema;
    if schema.class_index(target_label).is_none() {
        return Err(NarrateError::UnknownLabel(target_label.to_string()));
    }
    schema.check_instance(instance).map_err(crate::cart::CartError::from)?;
    let immutable = options
        .immutable_features
        .clone()
        .unwrap_or_else(|| default_immutable(schema));

    let mut best: Option<Counterfactual> = None;
    tree.root.for_each_leaf(|path, leaf| {
        let TreeNode::Leaf {
            label,
            samples,
            confidence_p,
            ..
        } = leaf
        else {
            return;
        };
        if label != target_label {
            return;
        }
        let Some(mut changes) = required_changes(tree, instance, &decision_path_conditions(path), &immutable) else {
            return;
        };
        changes.sort_by_key(|c| schema.feature_index(&c.feature));
        let candidate = Counterfactual {
            changes,
            new_label: label.clone(),
            new_confidence_p: *confidence_p,
            new_samples: *samples,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                (candidate.changes.len(), std::cmp::Reverse(candidate.new_samples))
                    .cmp(&(b.changes.len(), std::cmp::Reverse(b.new_samples)))
                    .then(candidate.new_confidence_p.total_cmp(&b.new_confidence_p))
                    .is_lt()
            }
        };
        if better {
            best = Some(candidate);
        }
    });
    Ok(best)
}

fn required_changes(
    tree: &DecisionTree,
    instance: &[Value],
    conditions: &[Condition],
    immutable: &[String],
) -> Option<Vec<Change>> {
    let schema = &tree.schema;
    let mut changes = Vec::new();
    for c in conditions {
        if !c.satisfiable(schema) {
            return None;
        }
        if c.holds(schema, instance) {
            continue;
        }
        if immutable.contains(&c.feature) {
            return None;
        }
        let i = schema.feature_index(&c.feature)?;
        let to = representative(tree, i, c)?;
        changes.push(Change {
            feature: c.feature.clone(),
            from: instance[i],
            to,
        });
    }
    Some(changes)
}

fn representative(tree: &DecisionTree, index: usize, condition: &Condition) -> Option<Value> {
    let schema = &tree.schema;
    let value = match &condition.kind {
        ConditionKind::Is { level } => Value::Categorical(schema.level_index(index, level)?),
        ConditionKind::NotIn { levels } => {
            let all = schema.features[index].levels()?;
            Value::Categorical(all.iter().position(|l| !levels.contains(l))?)
        }
        ConditionKind::Range { lower, upper } => {
            let gap = tree
                .feature_gaps
                .get(&condition.feature)
                .copied()
                .filter(|g| g.is_finite() && *g > 0.0)
                .unwrap_or(FALLBACK_GAP);
            let x = match (lower, upper) {
                (Some(lo), Some(hi)) => {
                    let mid = lo + (hi - lo) / 2.0;
                    if mid < *hi {
                        mid
                    } else {
                        *lo
                    }
                }
                (Some(lo), None) => lo + gap,
                (None, Some(hi)) => {
                    let x = hi - gap;
                    if x < *hi {
                        x
                    } else {
                        hi.next_down()
                    }
                }
                (None, None) => return None,
            };
            Value::Numeric(x)
        }
        ConditionKind::Impossible => return None,
    };
    condition.holds_value(schema, index, &value).then_some(value)
}

impl Condition {
    fn holds_value(&self, schema: &Schema, index: usize, value: &Value) -> bool {
        let mut probe = vec![Value::Numeric(0.0); schema.num_features()];
        probe[index] = *value;
        self.holds(schema, &probe)
    }
}
