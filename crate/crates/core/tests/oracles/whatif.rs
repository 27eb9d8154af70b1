//! Minimal-change counterfactuals by exhaustive search over feature values.

use riskweave::{predict, DecisionTree, FeatureKind, Test, Value};

/// What the search found: the minimal number of changed features and the
/// leaf chosen among all target leaves reachable with that many changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub changes: usize,
    /// Branch sequence from the root identifying the leaf.
    pub leaf: Vec<bool>,
    pub samples: u64,
    pub confidence_p: f64,
}

/// One value per region the tree's thresholds cut a numeric feature into;
/// every level of a categorical feature.
fn candidate_values(tree: &DecisionTree, f: usize) -> Vec<Value> {
    let spec = &tree.schema.features[f];
    match &spec.kind {
        FeatureKind::Categorical { levels } => (0..levels.len()).map(Value::Categorical).collect(),
        FeatureKind::Numeric { .. } => {
            let mut ts: Vec<f64> = tree
                .predicates()
                .into_iter()
                .filter(|p| p.feature == spec.name)
                .map(|p| match p.test {
                    Test::LessThan { threshold } | Test::GreaterOrEqual { threshold } => threshold,
                    _ => unreachable!(),
                })
                .collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let mut out: Vec<Value> = ts.iter().map(|t| Value::Numeric(*t)).collect();
            out.push(Value::Numeric(ts.first().map_or(0.0, |t| t - 1.0)));
            out
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Smallest `k` such that changing some `k` mutable features reaches a leaf
/// labelled `target`; among the leaves reachable at that `k`, the one with the
/// most samples, then the smallest p, then first in depth-first order.
pub fn brute_force_what_if(tree: &DecisionTree, instance: &[Value], target: &str, immutable: &[String]) -> Option<Expected> {
    let schema = &tree.schema;
    let mutable: Vec<usize> = (0..schema.num_features())
        .filter(|&f| !immutable.contains(&schema.features[f].name))
        .collect();
    let candidates: Vec<Vec<Value>> = (0..schema.num_features()).map(|f| candidate_values(tree, f)).collect();

    for k in 0..=mutable.len() {
        let mut found: Vec<Expected> = Vec::new();
        for subset in subsets(mutable.len(), k) {
            let features: Vec<usize> = subset.iter().map(|&i| mutable[i]).collect();
            let mut idx = vec![0usize; features.len()];
            loop {
                let mut x = instance.to_vec();
                for (j, &f) in features.iter().enumerate() {
                    x[f] = candidates[f][idx[j]];
                }
                let p = predict(tree, &x).unwrap();
                if p.label == target {
                    let leaf: Vec<bool> = p.path.iter().map(|s| s.branch).collect();
                    if !found.iter().any(|e| e.leaf == leaf) {
                        found.push(Expected {
                            changes: k,
                            leaf,
                            samples: p.samples,
                            confidence_p: p.confidence_p,
                        });
                    }
                }
                // odometer
                let mut j = 0;
                while j < idx.len() {
                    idx[j] += 1;
                    if idx[j] < candidates[features[j]].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == idx.len() {
                    break;
                }
            }
        }
        if !found.is_empty() {
            // depth-first, true branch first == lexicographic with true < false
            let dfs_key = |leaf: &Vec<bool>| leaf.iter().map(|b| u8::from(!*b)).collect::<Vec<u8>>();
            found.sort_by(|a, b| {
                b.samples
                    .cmp(&a.samples)
                    .then(a.confidence_p.total_cmp(&b.confidence_p))
                    .then(dfs_key(&a.leaf).cmp(&dfs_key(&b.leaf)))
            });
            return found.into_iter().next();
        }
    }
    None
}
