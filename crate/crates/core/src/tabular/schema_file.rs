//! The plain-text schema format.
//!
//! ```text
//! # lines starting with '#' are comments
//! [feature]
//! name = Age
//! kind = categorical
//! levels = 20-35, 35-50, 50-65, 65-75, 75-90
//!
//! [feature]
//! name = BMI
//! kind = numeric
//! unit = kg/m2
//!
//! [target]
//! name = CHD risk
//! classes = high risk, low risk
//! positive = high risk
//! ```
//!
//! Features keep the order of their sections. Keys and values are trimmed;
//! list values are comma separated.

use std::collections::BTreeMap;

use super::{FeatureKind, FeatureSpec, Schema, TabularError, TargetSpec};

enum Section {
    Feature,
    Target,
}

fn err(line: usize, msg: impl std::fmt::Display) -> TabularError {
    TabularError::InvalidSchema(format!("line {line}: {msg}"))
}

fn split_list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).collect()
}

pub fn parse_schema_text(text: &str) -> Result<Schema, TabularError> {
    let mut sections: Vec<(Section, usize, BTreeMap<String, String>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[feature]" => sections.push((Section::Feature, line_no, BTreeMap::new())),
            "[target]" => sections.push((Section::Target, line_no, BTreeMap::new())),
            _ => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(line_no, "expected `key = value`"))?;
                let (_, _, map) = sections
                    .last_mut()
                    .ok_or_else(|| err(line_no, "key outside of a section"))?;
                let key = key.trim().to_string();
                if map.insert(key.clone(), value.trim().to_string()).is_some() {
                    return Err(err(line_no, format!("duplicate key `{key}`")));
                }
            }
        }
    }

    let mut features = Vec::new();
    let mut target = None;
    for (section, line, mut map) in sections {
        let mut take = |key: &str| map.remove(key).ok_or_else(|| err(line, format!("missing `{key}`")));
        match section {
            Section::Feature => {
                let name = take("name")?;
                let kind = match take("kind")?.as_str() {
                    "categorical" => FeatureKind::Categorical {
                        levels: split_list(&take("levels")?),
                    },
                    "numeric" => FeatureKind::Numeric {
                        unit: map.remove("unit").unwrap_or_default(),
                    },
                    other => return Err(err(line, format!("unknown kind `{other}`"))),
                };
                let allow_missing = match map.remove("allow_missing").as_deref() {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(other) => return Err(err(line, format!("allow_missing must be true or false, got `{other}`"))),
                };
                features.push(FeatureSpec {
                    name,
                    kind,
                    allow_missing,
                });
            }
            Section::Target => {
                if target.is_some() {
                    return Err(err(line, "more than one [target] section"));
                }
                let name = take("name")?;
                let classes = split_list(&take("classes")?);
                if classes.len() != 2 {
                    return Err(TabularError::TargetNotBinary { found: classes.len() });
                }
                let positive = take("positive")?;
                target = Some(TargetSpec {
                    name,
                    classes: [classes[0].clone(), classes[1].clone()],
                    positive,
                });
            }
        }
        if let Some(key) = map.keys().next() {
            return Err(err(line, format!("unknown key `{key}`")));
        }
    }
    let target = target.ok_or_else(|| TabularError::InvalidSchema("no [target] section".into()))?;
    Schema::new(features, target)
}

pub fn schema_to_text(schema: &Schema) -> String {
    let mut out = String::new();
    for f in &schema.features {
        out.push_str("[feature]\n");
        out.push_str(&format!("name = {}\n", f.name));
        match &f.kind {
            FeatureKind::Categorical { levels } => {
                out.push_str("kind = categorical\n");
                out.push_str(&format!("levels = {}\n", levels.join(", ")));
            }
            FeatureKind::Numeric { unit } => {
                out.push_str("kind = numeric\n");
                if !unit.is_empty() {
                    out.push_str(&format!("unit = {unit}\n"));
                }
            }
        }
        if f.allow_missing {
            out.push_str("allow_missing = true\n");
        }
        out.push('\n');
    }
    let t = &schema.target;
    out.push_str("[target]\n");
    out.push_str(&format!("name = {}\n", t.name));
    out.push_str(&format!("classes = {}, {}\n", t.classes[0], t.classes[1]));
    out.push_str(&format!("positive = {}\n", t.positive));
    out
}
