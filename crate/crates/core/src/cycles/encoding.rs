use serde::{Deserialize, Serialize};

use super::CyclesError;
use crate::tabular::{FeatureKind, Schema, Value};

/// One model input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "column", rename_all = "snake_case")]
pub enum EncodedColumn {
    /// `(x - mean) / scale`.
    Standardized { feature: String, mean: f64, scale: f64 },
    /// 1 when the feature takes `level`, else 0.
    Indicator { feature: String, level: String },
}

impl EncodedColumn {
    pub fn feature(&self) -> &str {
        match self {
            EncodedColumn::Standardized { feature, .. } | EncodedColumn::Indicator { feature, .. } => feature,
        }
    }
}

/// Standardized numerics and one-hot categoricals with the first level as
/// the reference (all indicators zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub columns: Vec<EncodedColumn>,
}

impl Encoding {
    /// Means and (population) standard deviations taken from `rows`; a
    /// constant column gets scale 1.
    pub fn fit<'a>(schema: &Schema, rows: impl IntoIterator<Item = &'a [Value]> + Clone) -> Self {
        let mut columns = Vec::new();
        for (i, f) in schema.features.iter().enumerate() {
            match &f.kind {
                FeatureKind::Numeric { .. } => {
                    let (mut n, mut sum) = (0.0, 0.0);
                    for r in rows.clone() {
                        n += 1.0;
                        sum += r[i].as_f64().unwrap_or(0.0);
                    }
                    let mean = if n > 0.0 { sum / n } else { 0.0 };
                    let var = if n > 0.0 {
                        rows.clone()
                            .into_iter()
                            .map(|r| (r[i].as_f64().unwrap_or(0.0) - mean).powi(2))
                            .sum::<f64>()
                            / n
                    } else {
                        0.0
                    };
                    let sd = var.sqrt();
                    columns.push(EncodedColumn::Standardized {
                        feature: f.name.clone(),
                        mean,
                        scale: if sd > 1e-12 { sd } else { 1.0 },
                    });
                }
                FeatureKind::Categorical { levels } => {
                    for level in levels.iter().skip(1) {
                        columns.push(EncodedColumn::Indicator {
                            feature: f.name.clone(),
                            level: level.clone(),
                        });
                    }
                }
            }
        }
        Self { columns }
    }

    /// Mean 0, scale 1 for every numeric feature.
    pub fn identity(schema: &Schema) -> Self {
        let mut e = Self::fit(schema, std::iter::empty::<&[Value]>());
        for c in &mut e.columns {
            if let EncodedColumn::Standardized { mean, scale, .. } = c {
                *mean = 0.0;
                *scale = 1.0;
            }
        }
        e
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Every schema feature has its columns, in schema order, and nothing else.
    pub fn check_covers(&self, schema: &Schema) -> Result<(), CyclesError> {
        let expected = Self::identity(schema);
        let same_shape = expected.columns.len() == self.columns.len()
            && expected.columns.iter().zip(&self.columns).all(|(a, b)| match (a, b) {
                (EncodedColumn::Standardized { feature: fa, .. }, EncodedColumn::Standardized { feature: fb, mean, scale }) => {
                    fa == fb && mean.is_finite() && scale.is_finite() && *scale > 0.0
                }
                (a @ EncodedColumn::Indicator { .. }, b @ EncodedColumn::Indicator { .. }) => a == b,
                _ => false,
            });
        if same_shape {
            Ok(())
        } else {
            Err(CyclesError::InvalidModel("encoding does not match the schema".into()))
        }
    }

    pub fn encode(&self, schema: &Schema, features: &[Value]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| {
                let i = schema.feature_index(c.feature()).expect("encoding matches schema");
                match c {
                    EncodedColumn::Standardized { mean, scale, .. } => (features[i].as_f64().unwrap_or(0.0) - mean) / scale,
                    EncodedColumn::Indicator { level, .. } => {
                        let hit = features[i].as_level().and_then(|l| schema.level_name(i, l)) == Some(level.as_str());
                        f64::from(u8::from(hit))
                    }
                }
            })
            .collect()
    }

    /// Inverse of [`encode`](Self::encode) for well-formed encoded rows.
    pub fn decode(&self, schema: &Schema, encoded: &[f64]) -> Vec<Value> {
        let mut out: Vec<Value> = schema
            .features
            .iter()
            .map(|f| {
                if f.is_numeric() {
                    Value::Numeric(0.0)
                } else {
                    Value::Categorical(0)
                }
            })
            .collect();
        for (c, x) in self.columns.iter().zip(encoded) {
            let i = schema.feature_index(c.feature()).expect("encoding matches schema");
            match c {
                EncodedColumn::Standardized { mean, scale, .. } => out[i] = Value::Numeric(x * scale + mean),
                EncodedColumn::Indicator { level, .. } => {
                    if *x == 1.0 {
                        out[i] = Value::Categorical(schema.level_index(i, level).expect("level exists"));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{ivf_schema, synthesize_ivf};

    #[test]
    fn first_level_is_reference() {
        let schema = ivf_schema();
        let e = Encoding::identity(&schema);
        let indicators = e
            .columns
            .iter()
            .filter(|c| matches!(c, EncodedColumn::Indicator { feature, .. } if feature == "Type of embryo transfer"))
            .count();
        assert_eq!(indicators, schema.features[3].levels().unwrap().len() - 1);
    }

    #[test]
    fn round_trip() {
        let data = synthesize_ivf(5, 2000).unwrap();
        let schema = ivf_schema();
        let e = Encoding::fit(&schema, data.records.iter().map(|r| r.features.as_slice()));
        e.check_covers(&schema).unwrap();
        for r in &data.records {
            let back = e.decode(&schema, &e.encode(&schema, &r.features));
            for (a, b) in back.iter().zip(&r.features) {
                match (a, b) {
                    (Value::Numeric(x), Value::Numeric(y)) => assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0)),
                    _ => assert_eq!(a, b),
                }
            }
        }
    }
}
