use super::{Dataset, TabularError};
use crate::rng::SplitMix64;

/// Seeded random train/test split.
///
/// Row indices are shuffled with [`SplitMix64`]; the first
/// `round(n * test_fraction)` shuffled indices form the test set. Both
/// halves keep the original relative row order.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), TabularError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(TabularError::FractionOutOfRange(test_fraction));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(TabularError::TooFewRows { n, min: 2 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let n_test = (n as f64 * test_fraction).round() as usize;

    let mut in_test = vec![false; n];
    for &i in &order[..n_test] {
        in_test[i] = true;
    }
    let (mut train, mut test) = (Vec::with_capacity(n - n_test), Vec::with_capacity(n_test));
    for (row, is_test) in dataset.rows.iter().zip(in_test) {
        if is_test {
            test.push(row.clone());
        } else {
            train.push(row.clone());
        }
    }
    let part = |rows, tag: &str| Dataset {
        schema: dataset.schema.clone(),
        rows,
        provenance: format!("{}/{tag}(seed={seed})", dataset.provenance),
    };
    Ok((part(train, "train"), part(test, "test")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::synthesize_chd_like;
    use proptest::prelude::*;

    #[test]
    fn held_out_size_mirrors_chd_study() {
        let data = synthesize_chd_like(1, 2279).unwrap().dataset;
        let (train, test) = split(&data, 0.2, 7).unwrap();
        assert_eq!(test.len(), 456);
        assert_eq!(train.len(), 2279 - 456);
    }

    #[test]
    fn deterministic() {
        let data = synthesize_chd_like(5, 300).unwrap().dataset;
        assert_eq!(split(&data, 0.3, 9).unwrap(), split(&data, 0.3, 9).unwrap());
        assert_ne!(split(&data, 0.3, 9).unwrap().1, split(&data, 0.3, 10).unwrap().1);
    }

    #[test]
    fn fraction_must_be_inside_unit_interval() {
        let data = synthesize_chd_like(5, 100).unwrap().dataset;
        for f in [1.5, 0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(split(&data, f, 1), Err(TabularError::FractionOutOfRange(_))));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn split_is_partition(seed in any::<u64>(), fraction in 0.01f64..0.99) {
            let data = synthesize_chd_like(3, 150).unwrap().dataset;
            let (train, test) = split(&data, fraction, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), data.len());
            prop_assert_eq!(test.len(), (150.0 * fraction).round() as usize);
            // Every row is in exactly one part; match by identity in order.
            let (mut a, mut b) = (train.rows.iter().peekable(), test.rows.iter().peekable());
            for row in &data.rows {
                if a.peek() == Some(&row) { a.next(); } else { prop_assert_eq!(b.next(), Some(row)); }
            }
            prop_assert!(a.next().is_none() && b.next().is_none());
        }
    }
}
