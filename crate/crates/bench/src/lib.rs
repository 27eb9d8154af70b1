//! Seeded inputs shared by the benchmarks.

use riskweave::cycles::{synthesize_ivf, CycleRecord};
use riskweave::tabular::synthesize_chd_like;
use riskweave::Dataset;

/// The CHD-like cohort at study size (2279 rows).
pub fn chd_cohort() -> Dataset {
    synthesize_chd_like(1, 2279).expect("valid size").dataset
}

/// At least `n` person-period IVF records.
pub fn ivf_records(n: usize) -> Vec<CycleRecord> {
    synthesize_ivf(2, n).expect("valid size").records
}
