//! Exhaustive split search in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use riskweave::{FeatureKind, Predicate, Row, Schema};

fn gini_exact(counts: [u64; 2]) -> BigRational {
    let n = counts[0] + counts[1];
    let one = BigRational::from_integer(BigInt::from(1));
    if n == 0 {
        return BigRational::zero();
    }
    let mut g = one;
    for c in counts {
        let p = BigRational::new(BigInt::from(c), BigInt::from(n));
        g -= &p * &p;
    }
    g
}

fn counts_where(rows: &[Row], schema: &Schema, pred: &Predicate, side: bool) -> [u64; 2] {
    let mut c = [0u64; 2];
    for r in rows {
        if pred.holds(schema, &r.values) == side {
            c[r.label] += 1;
        }
    }
    c
}

/// Tie-break key: feature index, then threshold or level name.
#[derive(PartialEq, PartialOrd)]
enum Key {
    Num(usize, f64),
    Cat(usize, String),
}

impl Key {
    fn before(&self, other: &Key) -> bool {
        match (self, other) {
            (Key::Num(a, x), Key::Num(b, y)) => (a, x) < (b, y),
            (Key::Cat(a, x), Key::Cat(b, y)) => (a, x) < (b, y),
            (Key::Num(a, _), Key::Cat(b, _)) | (Key::Cat(a, _), Key::Num(b, _)) => a < b,
        }
    }
}

/// Every candidate predicate scored by exact Gini decrease; returns the best
/// admissible one and its exact decrease.
pub fn brute_force_best_split(
    rows: &[Row],
    schema: &Schema,
    min_samples_leaf: usize,
    min_impurity_decrease: f64,
) -> Option<(Predicate, BigRational)> {
    let total = {
        let mut c = [0u64; 2];
        for r in rows {
            c[r.label] += 1;
        }
        c
    };
    let n = BigRational::from_integer(BigInt::from(rows.len()));
    let parent = gini_exact(total);
    let threshold = BigRational::from_f64(min_impurity_decrease).unwrap();

    let mut best: Option<(BigRational, Key, Predicate)> = None;
    for (f, spec) in schema.features.iter().enumerate() {
        let mut candidates: Vec<(Key, Predicate)> = Vec::new();
        match &spec.kind {
            FeatureKind::Categorical { levels } => {
                for level in levels {
                    candidates.push((Key::Cat(f, level.clone()), Predicate::equals(&spec.name, level)));
                }
            }
            FeatureKind::Numeric { .. } => {
                let mut xs: Vec<f64> = rows.iter().map(|r| r.values[f].as_f64().unwrap()).collect();
                xs.sort_by(f64::total_cmp);
                xs.dedup();
                for w in xs.windows(2) {
                    let m = (w[0] + w[1]) / 2.0;
                    let t = if m > w[0] { m } else { w[1] };
                    candidates.push((Key::Num(f, t), Predicate::less_than(&spec.name, t)));
                }
            }
        }
        for (key, pred) in candidates {
            let left = counts_where(rows, schema, &pred, true);
            let right = counts_where(rows, schema, &pred, false);
            let (nl, nr) = (left[0] + left[1], right[0] + right[1]);
            if nl == 0 || nr == 0 || (nl as usize) < min_samples_leaf || (nr as usize) < min_samples_leaf {
                continue;
            }
            let weighted = BigRational::from_integer(BigInt::from(nl)) / &n * gini_exact(left)
                + BigRational::from_integer(BigInt::from(nr)) / &n * gini_exact(right);
            let decrease = &parent - weighted;
            let replace = match &best {
                None => true,
                Some((d, k, _)) => decrease > *d || (decrease == *d && key.before(k)),
            };
            if replace {
                best = Some((decrease, key, pred));
            }
        }
    }
    let (decrease, _, pred) = best?;
    if decrease <= BigRational::zero() || decrease < threshold {
        return None;
    }
    Some((pred, decrease))
}
