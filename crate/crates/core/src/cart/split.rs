use std::cmp::Ordering;

use super::{CartError, TrainParams};
use crate::predicate::Predicate;
use crate::tabular::{FeatureKind, Row, Schema, Value};

/// Gini impurity `1 - sum (c_i / n)^2`.
pub fn gini(counts: &[u64]) -> Result<f64, CartError> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(CartError::EmptyCounts);
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub predicate: Predicate,
    /// Parent Gini minus the size-weighted Gini of the two children.
    pub impurity_decrease: f64,
}

/// Exact score of a binary partition: `a / n_left + b / n_right` where `a`, `b`
/// are the sums of squared class counts. Larger score means lower weighted
/// Gini. Kept as a fraction so ties are detected exactly.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(left: [u64; 2], right: [u64; 2]) -> Self {
        let sq = |c: [u64; 2]| u128::from(c[0]).pow(2) + u128::from(c[1]).pow(2);
        let (nl, nr) = (u128::from(left[0] + left[1]), u128::from(right[0] + right[1]));
        Self {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    /// Impurity decrease relative to a parent with `counts`; exact sign, float magnitude.
    fn decrease(&self, counts: [u64; 2]) -> (bool, f64) {
        let n = u128::from(counts[0] + counts[1]);
        let parent_sq = u128::from(counts[0]).pow(2) + u128::from(counts[1]).pow(2);
        let positive = self.num * n > parent_sq * self.den;
        let nf = n as f64;
        let value = (self.num as f64 / self.den as f64 - parent_sq as f64 / nf) / nf;
        (positive, value.max(0.0))
    }
}

/// Numeric split threshold between two consecutive distinct sorted values.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = (lo + hi) / 2.0;
    // Adjacent floats: the rounded midpoint must still separate lo from hi.
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Best binary split of `rows` by weighted Gini decrease.
///
/// Candidates are `equals(level)` for every level of each categorical feature
/// and `less_than(m)` at every midpoint between consecutive distinct values of
/// each numeric feature. Both children must hold at least
/// `params.min_samples_leaf` rows, and the decrease must be strictly positive
/// and at least `params.min_impurity_decrease`. Ties go to the lowest feature
/// index, then the smallest threshold or lexicographically smallest level.
pub fn best_split(rows: &[Row], schema: &Schema, params: &TrainParams) -> Option<Split> {
    let all: Vec<usize> = (0..rows.len()).collect();
    best_split_of(rows, &all, schema, params)
}

pub(crate) fn best_split_of(rows: &[Row], subset: &[usize], schema: &Schema, params: &TrainParams) -> Option<Split> {
    let mut counts = [0u64; 2];
    for &i in subset {
        counts[rows[i].label] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return None;
    }
    let min_leaf = params.min_samples_leaf as u64;
    let admissible = |left: [u64; 2], right: [u64; 2]| left[0] + left[1] >= min_leaf && right[0] + right[1] >= min_leaf;

    let mut best: Option<(Score, Predicate)> = None;
    let mut consider = |score: Score, make: &dyn Fn() -> Predicate| {
        if best.as_ref().is_none_or(|(b, _)| score.cmp(b) == Ordering::Greater) {
            best = Some((score, make()));
        }
    };

    for (f, spec) in schema.features.iter().enumerate() {
        match &spec.kind {
            FeatureKind::Categorical { levels } => {
                let mut per_level = vec![[0u64; 2]; levels.len()];
                for &i in subset {
                    if let Value::Categorical(l) = rows[i].values[f] {
                        per_level[l][rows[i].label] += 1;
                    }
                }
                let mut order: Vec<usize> = (0..levels.len()).collect();
                order.sort_by(|&a, &b| levels[a].cmp(&levels[b]));
                for l in order {
                    let left = per_level[l];
                    let right = [counts[0] - left[0], counts[1] - left[1]];
                    if admissible(left, right) {
                        consider(Score::new(left, right), &|| Predicate::equals(&spec.name, &levels[l]));
                    }
                }
            }
            FeatureKind::Numeric { .. } => {
                let mut sorted: Vec<(f64, usize)> = subset
                    .iter()
                    .filter_map(|&i| rows[i].values[f].as_f64().map(|x| (x, rows[i].label)))
                    .collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = [0u64; 2];
                for w in 0..sorted.len().saturating_sub(1) {
                    left[sorted[w].1] += 1;
                    let (lo, hi) = (sorted[w].0, sorted[w + 1].0);
                    if lo == hi {
                        continue;
                    }
                    let right = [counts[0] - left[0], counts[1] - left[1]];
                    if admissible(left, right) {
                        let threshold = midpoint(lo, hi);
                        consider(Score::new(left, right), &|| Predicate::less_than(&spec.name, threshold));
                    }
                }
            }
        }
    }

    let (score, predicate) = best?;
    let (positive, decrease) = score.decrease(counts);
    if !positive || decrease < params.min_impurity_decrease {
        return None;
    }
    Some(Split {
        predicate,
        impurity_decrease: decrease,
    })
}
