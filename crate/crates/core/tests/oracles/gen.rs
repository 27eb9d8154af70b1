//! Seeded random schemas, datasets, trees and instances.

use riskweave::cart::ConfidenceConfig;
use riskweave::{DecisionTree, FeatureSpec, Predicate, Row, Schema, SplitMix64, TargetSpec, TrainParams, TreeNode, Value};

const LEVEL_POOL: [&str; 5] = ["moss", "amber", "slate", "coral", "ivory"];
const FEATURE_POOL: [&str; 5] = ["Colour", "Weight", "Shade", "Height", "Texture"];

/// Up to five features, mixing categorical (levels in non-sorted declaration
/// order) and numeric ones.
pub fn random_schema(rng: &mut SplitMix64, n_features: usize) -> Schema {
    let features = (0..n_features)
        .map(|i| {
            let name = FEATURE_POOL[i];
            if rng.bernoulli(0.5) {
                let k = 2 + rng.below(3) as usize;
                let mut levels: Vec<&str> = LEVEL_POOL.to_vec();
                rng.shuffle(&mut levels);
                FeatureSpec::categorical(name, levels[..k].to_vec())
            } else {
                FeatureSpec::numeric(name, "cm")
            }
        })
        .collect();
    Schema::new(features, TargetSpec::new("Outcome", ["no", "yes"], "yes")).unwrap()
}

/// Numeric values come from a small grid half the time so duplicates and
/// exact ties are common.
pub fn random_value(rng: &mut SplitMix64, schema: &Schema, f: usize) -> Value {
    match schema.features[f].levels() {
        Some(levels) => Value::Categorical(rng.below(levels.len() as u64) as usize),
        None => {
            if rng.bernoulli(0.5) {
                Value::Numeric(rng.below(8) as f64)
            } else {
                Value::Numeric((rng.next_f64() * 20.0 - 5.0).round() / 4.0)
            }
        }
    }
}

pub fn random_instance(rng: &mut SplitMix64, schema: &Schema) -> Vec<Value> {
    (0..schema.num_features()).map(|f| random_value(rng, schema, f)).collect()
}

/// Labels depend weakly on the first feature so splits have signal.
pub fn random_rows(rng: &mut SplitMix64, schema: &Schema, n: usize) -> Vec<Row> {
    (0..n)
        .map(|_| {
            let values = random_instance(rng, schema);
            let bias = match values[0] {
                Value::Categorical(l) => 0.2 * l as f64,
                Value::Numeric(x) => 0.05 * x,
            };
            let label = usize::from(rng.bernoulli((0.3 + bias).clamp(0.05, 0.95)));
            Row { values, label }
        })
        .collect()
}

pub fn random_predicate(rng: &mut SplitMix64, schema: &Schema) -> Predicate {
    let f = rng.below(schema.num_features() as u64) as usize;
    let spec = &schema.features[f];
    match spec.levels() {
        Some(levels) => {
            let level = &levels[rng.below(levels.len() as u64) as usize];
            if rng.bernoulli(0.5) {
                Predicate::equals(&spec.name, level)
            } else {
                Predicate::not_equals(&spec.name, level)
            }
        }
        None => {
            let t = rng.below(8) as f64 + 0.5;
            if rng.bernoulli(0.5) {
                Predicate::less_than(&spec.name, t)
            } else {
                Predicate::greater_or_equal(&spec.name, t)
            }
        }
    }
}

fn random_node(rng: &mut SplitMix64, schema: &Schema, leaves: usize) -> TreeNode {
    if leaves == 1 {
        let counts = [rng.below(40), rng.below(40)];
        let counts = if counts == [0, 0] { [1, 0] } else { counts };
        return TreeNode::leaf(schema, counts, ConfidenceConfig::default(), &[0.5, 0.5]).unwrap();
    }
    let left = 1 + rng.below(leaves as u64 - 1) as usize;
    TreeNode::internal(
        random_predicate(rng, schema),
        random_node(rng, schema, left),
        random_node(rng, schema, leaves - left),
    )
}

/// A hand-assembled tree with `leaves` leaves and random predicates; paths may
/// be contradictory, which makes some leaves unreachable.
pub fn random_tree(rng: &mut SplitMix64, schema: &Schema, leaves: usize) -> DecisionTree {
    let root = random_node(rng, schema, leaves);
    DecisionTree::from_root(schema.clone(), root, TrainParams::default(), ConfidenceConfig::default()).unwrap()
}
