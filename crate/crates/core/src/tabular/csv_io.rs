use std::collections::BTreeSet;

use super::{Dataset, FeatureKind, FeatureSpec, Row, Schema, TabularError, TargetSpec, Value};

/// Labels recognised as the "high risk" class when a schema is inferred.
const POSITIVE_HINTS: &[&str] = &["high risk", "high", "yes", "true", "1", "positive", "success"];

/// Parses a decimal number: optional sign, digits, at most one '.', no
/// exponent, no `inf`/`nan`.
pub(crate) fn parse_decimal(s: &str) -> Option<f64> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    let mut seen_digit = false;
    let mut seen_dot = false;
    for c in digits.chars() {
        match c {
            '0'..='9' => seen_digit = true,
            '.' if !seen_dot => seen_dot = true,
            _ => return None,
        }
    }
    if !seen_digit {
        return None;
    }
    s.parse().ok()
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn read_all(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>), TabularError> {
    let mut rdr = reader(text);
    let header: Vec<String> = match rdr.headers() {
        Ok(h) if !(h.len() == 1 && h[0].is_empty()) => h.iter().map(String::from).collect(),
        _ => return Err(TabularError::EmptyFile),
    };
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| TabularError::MalformedRow {
            row: i + 1,
            detail: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(TabularError::MalformedRow {
                row: i + 1,
                detail: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(TabularError::EmptyFile);
    }
    Ok((header, records))
}

/// Reads a headed CSV into a [`Dataset`], coercing each cell per `schema`.
///
/// Columns may appear in any order. Rows keep their file order. Row numbers
/// in errors are 1-based and exclude the header line.
pub fn parse_csv(text: &str, schema: &Schema) -> Result<Dataset, TabularError> {
    let (header, records) = read_all(text)?;

    // Position in the file of each schema feature, then the target.
    let mut seen = BTreeSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(TabularError::DuplicateColumn(name.clone()));
        }
        if *name != schema.target.name && schema.feature_index(name).is_none() {
            return Err(TabularError::UnknownColumn(name.clone()));
        }
    }
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TabularError::MissingColumn(name.to_string()))
    };
    let feature_cols = schema
        .features
        .iter()
        .map(|f| position(&f.name))
        .collect::<Result<Vec<_>, _>>()?;
    let target_col = position(&schema.target.name)?;

    let mut rows = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        let row = r + 1;
        let cell = |col: usize, name: &str| -> Result<&str, TabularError> {
            let raw = &rec[col];
            if raw.is_empty() {
                Err(TabularError::MissingValue {
                    row,
                    column: name.to_string(),
                })
            } else {
                Ok(raw)
            }
        };
        let out_of_domain = |name: &str, value: &str| TabularError::ValueOutOfDomain {
            row,
            column: name.to_string(),
            value: value.to_string(),
        };
        let mut values = Vec::with_capacity(schema.features.len());
        for (i, (f, &col)) in schema.features.iter().zip(&feature_cols).enumerate() {
            let raw = cell(col, &f.name)?;
            let v = match &f.kind {
                FeatureKind::Categorical { .. } => schema
                    .level_index(i, raw)
                    .map(Value::Categorical)
                    .ok_or_else(|| out_of_domain(&f.name, raw))?,
                FeatureKind::Numeric { .. } => parse_decimal(raw)
                    .map(Value::Numeric)
                    .ok_or_else(|| out_of_domain(&f.name, raw))?,
            };
            values.push(v);
        }
        let raw = cell(target_col, &schema.target.name)?;
        let label = schema
            .class_index(raw)
            .ok_or_else(|| out_of_domain(&schema.target.name, raw))?;
        rows.push(Row { values, label });
    }
    Ok(Dataset {
        schema: schema.clone(),
        rows,
        provenance: "csv".into(),
    })
}

/// Infers a schema from a headed CSV whose last column is the target.
///
/// A feature column is numeric when every non-empty cell is a decimal
/// number; otherwise it is categorical with its observed levels sorted
/// lexicographically. Numeric units are left empty.
pub fn infer_schema(text: &str) -> Result<Schema, TabularError> {
    let (header, records) = read_all(text)?;
    if header.len() < 2 {
        return Err(TabularError::InvalidSchema(
            "need at least one feature column and a target column".into(),
        ));
    }
    let target_col = header.len() - 1;
    let mut features = Vec::with_capacity(target_col);
    for (col, name) in header[..target_col].iter().enumerate() {
        let cells: Vec<&str> = records.iter().map(|r| &r[col]).filter(|c| !c.is_empty()).collect();
        if cells.is_empty() {
            return Err(TabularError::InvalidSchema(format!("column `{name}` has no values")));
        }
        if cells.iter().all(|c| parse_decimal(c).is_some()) {
            features.push(FeatureSpec::numeric(name.clone(), ""));
        } else {
            let levels: BTreeSet<&str> = cells.into_iter().collect();
            features.push(FeatureSpec::categorical(name.clone(), levels));
        }
    }
    let classes: BTreeSet<&str> = records.iter().map(|r| &r[target_col]).filter(|c| !c.is_empty()).collect();
    if classes.len() != 2 {
        return Err(TabularError::TargetNotBinary { found: classes.len() });
    }
    let classes: Vec<&str> = classes.into_iter().collect();
    let positive = POSITIVE_HINTS
        .iter()
        .find_map(|hint| classes.iter().find(|c| c.eq_ignore_ascii_case(hint)))
        .unwrap_or(&classes[1]);
    Schema::new(
        features,
        TargetSpec::new(header[target_col].clone(), [classes[0], classes[1]], positive),
    )
}

/// Writes a dataset back out as CSV: features in schema order, target last.
/// Numbers use the shortest representation that parses back exactly.
pub fn to_csv(dataset: &Dataset) -> String {
    let schema = &dataset.schema;
    let mut out = String::new();
    let header: Vec<&str> = schema
        .features
        .iter()
        .map(|f| f.name.as_str())
        .chain([schema.target.name.as_str()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &dataset.rows {
        for (i, v) in row.values.iter().enumerate() {
            match v {
                Value::Categorical(l) => out.push_str(schema.level_name(i, *l).unwrap_or("")),
                Value::Numeric(x) => out.push_str(&x.to_string()),
            }
            out.push(',');
        }
        out.push_str(schema.class_name(row.label));
        out.push('\n');
    }
    out
}
