//! Person-period CSV: the schema's feature columns, a `Cycle` column and the
//! target column (positive class = success in that cycle).

use super::{CycleRecord, CyclesError};
use crate::tabular::{parse_csv, to_csv, Dataset, FeatureSpec, Row, Schema, TabularError, Value};

pub const CYCLE_COLUMN: &str = "Cycle";

fn with_cycle_column(schema: &Schema) -> Result<Schema, TabularError> {
    let mut features = schema.features.clone();
    features.push(FeatureSpec::numeric(CYCLE_COLUMN, ""));
    Schema::new(features, schema.target.clone())
}

pub fn records_from_csv(text: &str, schema: &Schema) -> Result<Vec<CycleRecord>, CyclesError> {
    let data = parse_csv(text, &with_cycle_column(schema)?)?;
    let positive = schema.positive_class();
    data.rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            let cycle = row.values.pop().and_then(|v| v.as_f64()).unwrap_or(0.0);
            if cycle < 1.0 || cycle.fract() != 0.0 {
                return Err(CyclesError::Tabular(TabularError::ValueOutOfDomain {
                    row: i + 1,
                    column: CYCLE_COLUMN.into(),
                    value: cycle.to_string(),
                }));
            }
            Ok(CycleRecord {
                features: row.values,
                cycle: cycle as usize,
                outcome: row.label == positive,
            })
        })
        .collect()
}

pub fn records_to_csv(records: &[CycleRecord], schema: &Schema) -> Result<String, CyclesError> {
    let positive = schema.positive_class();
    let rows = records
        .iter()
        .map(|r| {
            let mut values = r.features.clone();
            values.push(Value::Numeric(r.cycle as f64));
            Row {
                values,
                label: if r.outcome { positive } else { 1 - positive },
            }
        })
        .collect();
    let data = Dataset::new(with_cycle_column(schema)?, rows, "cycle records")?;
    Ok(to_csv(&data))
}
