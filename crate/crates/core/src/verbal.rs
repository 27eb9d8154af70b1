//! Verbal certainty phrases and numeric framings of probabilities.
//!
//! A [`VerbalMap`] is a grid indexed by a model-accuracy band and a
//! per-prediction confidence band (the leaf chi-square p-value, where lower
//! means more certain). The default grid is loaded from
//! `data/verbal_map.json` and can be replaced by any file of the same shape:
//!
//! ```json
//! {
//!   "format": "riskweave.verbal_map", "version": 1,
//!   "accuracy_edges": [0.9],
//!   "confidence_edges": [0.01, 0.05, 0.33],
//!   "phrases": [["possibly virtually certain", ...], ["virtually certain", ...]]
//! }
//! ```
//!
//! `phrases[a][c]`: rows run from the lowest accuracy band up, columns from
//! the most confident p-value band to the least. An accuracy equal to an
//! edge belongs to the band above it; a p-value equal to an edge belongs to
//! the band below it (`p <= 0.01` is the first column).

use serde::{Deserialize, Serialize};

pub const VERBAL_MAP_FORMAT: &str = "riskweave.verbal_map";
const DEFAULT_MAP: &str = include_str!("../data/verbal_map.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerbalError {
    #[error("invalid verbal map: {0}")]
    InvalidMap(String),
    #[error("{name} must be a number in [0, 1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("natural-frequency base must be at least 1")]
    InvalidBase,
}

impl VerbalError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidMap(_) => "InvalidMap",
            Self::OutOfRange { .. } => "OutOfRange",
            Self::InvalidBase => "InvalidBase",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDocument", into = "MapDocument")]
pub struct VerbalMap {
    accuracy_edges: Vec<f64>,
    confidence_edges: Vec<f64>,
    phrases: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct MapDocument {
    format: String,
    version: u32,
    accuracy_edges: Vec<f64>,
    confidence_edges: Vec<f64>,
    phrases: Vec<Vec<String>>,
}

impl TryFrom<MapDocument> for VerbalMap {
    type Error = VerbalError;

    fn try_from(doc: MapDocument) -> Result<Self, VerbalError> {
        if doc.format != VERBAL_MAP_FORMAT || doc.version != 1 {
            return Err(VerbalError::InvalidMap(format!("unsupported document {} v{}", doc.format, doc.version)));
        }
        VerbalMap::new(doc.accuracy_edges, doc.confidence_edges, doc.phrases)
    }
}

impl From<VerbalMap> for MapDocument {
    fn from(m: VerbalMap) -> Self {
        MapDocument {
            format: VERBAL_MAP_FORMAT.into(),
            version: 1,
            accuracy_edges: m.accuracy_edges,
            confidence_edges: m.confidence_edges,
            phrases: m.phrases,
        }
    }
}

impl Default for VerbalMap {
    fn default() -> Self {
        Self::from_json(DEFAULT_MAP).expect("bundled verbal map is valid")
    }
}

fn check_edges(edges: &[f64], name: &str) -> Result<(), VerbalError> {
    for (i, e) in edges.iter().enumerate() {
        if !(*e > 0.0 && *e < 1.0) {
            return Err(VerbalError::InvalidMap(format!("{name} must lie strictly inside (0, 1)")));
        }
        if i > 0 && edges[i - 1] >= *e {
            return Err(VerbalError::InvalidMap(format!("{name} must be strictly increasing")));
        }
    }
    Ok(())
}

fn unit(name: &'static str, value: f64) -> Result<f64, VerbalError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(VerbalError::OutOfRange { name, value })
    }
}

impl VerbalMap {
    pub fn new(accuracy_edges: Vec<f64>, confidence_edges: Vec<f64>, phrases: Vec<Vec<String>>) -> Result<Self, VerbalError> {
        check_edges(&accuracy_edges, "accuracy_edges")?;
        check_edges(&confidence_edges, "confidence_edges")?;
        if phrases.len() != accuracy_edges.len() + 1 {
            return Err(VerbalError::InvalidMap(format!(
                "expected {} accuracy rows, found {}",
                accuracy_edges.len() + 1,
                phrases.len()
            )));
        }
        for row in &phrases {
            if row.len() != confidence_edges.len() + 1 {
                return Err(VerbalError::InvalidMap(format!(
                    "expected {} phrases per row, found {}",
                    confidence_edges.len() + 1,
                    row.len()
                )));
            }
            if row.iter().any(|p| p.trim().is_empty()) {
                return Err(VerbalError::InvalidMap("phrases must be non-empty".into()));
            }
        }
        Ok(Self {
            accuracy_edges,
            confidence_edges,
            phrases,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, VerbalError> {
        serde_json::from_str(text).map_err(|e| VerbalError::InvalidMap(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn accuracy_bands(&self) -> usize {
        self.accuracy_edges.len() + 1
    }

    pub fn confidence_bands(&self) -> usize {
        self.confidence_edges.len() + 1
    }

    /// Grid cell `(accuracy band, confidence band)` for the inputs.
    pub fn locate(&self, accuracy: f64, confidence_p: f64) -> Result<(usize, usize), VerbalError> {
        let accuracy = unit("accuracy", accuracy)?;
        let p = unit("confidence_p", confidence_p)?;
        let a = self.accuracy_edges.iter().take_while(|e| accuracy >= **e).count();
        let c = self.confidence_edges.iter().take_while(|e| p > **e).count();
        Ok((a, c))
    }

    pub fn phrase(&self, accuracy_band: usize, confidence_band: usize) -> &str {
        &self.phrases[accuracy_band][confidence_band]
    }
}

/// Certainty phrase for a prediction given model accuracy and its confidence p-value.
pub fn verbalize(map: &VerbalMap, accuracy: f64, confidence_p: f64) -> Result<String, VerbalError> {
    let (a, c) = map.locate(accuracy, confidence_p)?;
    Ok(map.phrase(a, c).to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityStyle<'a> {
    Percentage,
    NaturalFrequency { base: u64 },
    Verbal(&'a VerbalMap),
}

/// Rounds half-up after snapping away binary representation error, so that
/// 0.285 * 100 rounds to 29 rather than 28.
pub fn round_half_up(x: f64) -> i64 {
    let snapped = (x * 1e9).round() / 1e9;
    (snapped + 0.5).floor() as i64
}

/// Renders a probability as "29%", "29 in 100 people like you", or a phrase.
///
/// The verbal style reads the top accuracy row of the map and places `value`
/// on the confidence axis as `1 - value`, so probabilities near 1 map to the
/// most certain phrase.
pub fn format_probability(value: f64, style: &ProbabilityStyle<'_>) -> Result<String, VerbalError> {
    let value = unit("probability", value)?;
    match style {
        ProbabilityStyle::Percentage => Ok(format!("{}%", round_half_up(value * 100.0))),
        ProbabilityStyle::NaturalFrequency { base } => {
            if *base < 1 {
                return Err(VerbalError::InvalidBase);
            }
            Ok(format!("{} in {} people like you", round_half_up(value * *base as f64), base))
        }
        ProbabilityStyle::Verbal(map) => {
            let top = map.accuracy_bands() - 1;
            let (_, c) = map.locate(1.0, 1.0 - value)?;
            Ok(map.phrase(top, c).to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_grid_lookups() {
        let m = VerbalMap::default();
        assert_eq!(verbalize(&m, 0.92, 0.0).unwrap(), "virtually certain");
        assert_eq!(verbalize(&m, 0.92, 0.03).unwrap(), "very likely");
        assert_eq!(verbalize(&m, 0.92, 0.2).unwrap(), "likely");
        assert_eq!(verbalize(&m, 0.92, 0.9).unwrap(), "uncertain");
        assert!(verbalize(&m, 0.85, 0.5).unwrap().contains("possibly"));
    }

    #[test]
    fn band_edges() {
        let m = VerbalMap::default();
        assert_eq!(m.locate(0.9, 0.01).unwrap(), (1, 0));
        assert_eq!(m.locate(0.8999, 0.0101).unwrap(), (0, 1));
        assert_eq!(m.locate(1.0, 1.0).unwrap(), (1, 3));
        assert_eq!(m.locate(0.0, 0.33).unwrap(), (0, 2));
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let m = VerbalMap::default();
        assert!(verbalize(&m, 1.2, 0.0).is_err());
        assert!(verbalize(&m, 0.9, f64::NAN).is_err());
    }

    #[test]
    fn map_validation() {
        let ok = VerbalMap::default().to_json();
        assert_eq!(VerbalMap::from_json(&ok).unwrap(), VerbalMap::default());
        let descending = ok.replace("0.01, 0.05", "0.05, 0.01").replace("0.01,\n    0.05", "0.05,\n    0.01");
        assert!(matches!(VerbalMap::from_json(&descending), Err(VerbalError::InvalidMap(_))));
        assert!(VerbalMap::new(vec![0.9], vec![0.05], vec![vec!["a".into(), "b".into()]]).is_err());
        assert!(VerbalMap::new(vec![], vec![0.05], vec![vec!["a".into()]]).is_err());
        assert!(VerbalMap::new(vec![], vec![1.0], vec![vec!["a".into(), "b".into()]]).is_err());
        assert!(VerbalMap::new(vec![], vec![0.5], vec![vec!["a".into(), " ".into()]]).is_err());
        assert!(VerbalMap::new(vec![], vec![0.5], vec![vec!["a".into(), "b".into()]]).is_ok());
    }

    #[test]
    fn framings() {
        let m = VerbalMap::default();
        assert_eq!(format_probability(0.29, &ProbabilityStyle::Percentage).unwrap(), "29%");
        assert_eq!(
            format_probability(0.29, &ProbabilityStyle::NaturalFrequency { base: 100 }).unwrap(),
            "29 in 100 people like you"
        );
        assert_eq!(
            format_probability(0.005, &ProbabilityStyle::NaturalFrequency { base: 1000 }).unwrap(),
            "5 in 1000 people like you"
        );
        assert_eq!(format_probability(0.285, &ProbabilityStyle::Percentage).unwrap(), "29%");
        assert_eq!(format_probability(0.995, &ProbabilityStyle::Verbal(&m)).unwrap(), "virtually certain");
        assert_eq!(format_probability(0.3, &ProbabilityStyle::Verbal(&m)).unwrap(), "uncertain");
        assert_eq!(
            format_probability(0.5, &ProbabilityStyle::NaturalFrequency { base: 0 }),
            Err(VerbalError::InvalidBase)
        );
    }

    proptest! {
        #[test]
        fn total_and_monotone(acc in 0.0f64..=1.0, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let m = VerbalMap::default();
            let (a1, c1) = m.locate(acc, p).unwrap();
            prop_assert!(a1 < m.accuracy_bands() && c1 < m.confidence_bands());
            // Smaller p never lands in a less certain (higher) band.
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(m.locate(acc, lo).unwrap().1 <= m.locate(acc, hi).unwrap().1);
        }

        #[test]
        fn low_accuracy_is_hedged(acc in 0.0f64..0.9, p in 0.0f64..=1.0) {
            let m = VerbalMap::default();
            prop_assert!(verbalize(&m, acc, p).unwrap().starts_with("possibly"));
            prop_assert!(!verbalize(&m, 0.95, p).unwrap().contains("possibly"));
        }

        #[test]
        fn percentage_matches_frequency(v in 0.0f64..=1.0) {
            let pct = format_probability(v, &ProbabilityStyle::Percentage).unwrap();
            let freq = format_probability(v, &ProbabilityStyle::NaturalFrequency { base: 100 }).unwrap();
            prop_assert_eq!(pct.trim_end_matches('%'), freq.split(' ').next().unwrap());
        }
    }
}
