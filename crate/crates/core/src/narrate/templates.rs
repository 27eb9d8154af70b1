//! Narrative templates: named strings with `{slot}` placeholders.
//!
//! Loaded from a versioned JSON document (`data/templates.json` is the
//! bundled default). Unknown template names and unknown slots are rejected
//! at load time; a template the caller needs but the file omits surfaces as
//! [`NarrateError::MissingTemplate`] when it is used. `{{` and `}}` produce
//! literal braces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NarrateError;

pub const TEMPLATES_FORMAT: &str = "riskweave.templates";
const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.json");

/// Every template name the crate renders, with the slots it may use.
pub const TEMPLATE_SLOTS: &[(&str, &[&str])] = &[
    ("outcome", &["certainty", "label"]),
    ("reasons", &["conditions"]),
    ("support", &["samples"]),
    ("condition_is", &["feature", "level"]),
    ("condition_not_in", &["feature", "levels"]),
    ("condition_below", &["feature", "upper"]),
    ("condition_at_least", &["feature", "lower"]),
    ("condition_between", &["feature", "lower", "upper"]),
    ("global_intro", &["rules", "train_size"]),
    ("global_rule", &["index", "conditions", "label", "certainty", "samples"]),
    ("global_rule_unconditional", &["index", "label", "certainty", "samples"]),
    ("model_scope", &["features"]),
    ("model_scope_empty", &[]),
    ("coverage_generic", &["features"]),
    ("coverage_caveat", &["attribute"]),
    ("curve_single", &["outcome", "percentage", "frequency"]),
    ("curve_cumulative", &["cycles", "outcome", "percentage", "frequency"]),
];

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateDocument", into = "TemplateDocument")]
pub struct TemplateStore {
    source: BTreeMap<String, String>,
    parsed: BTreeMap<String, Vec<Piece>>,
}

#[derive(Serialize, Deserialize)]
struct TemplateDocument {
    format: String,
    version: u32,
    templates: BTreeMap<String, String>,
}

impl TryFrom<TemplateDocument> for TemplateStore {
    type Error = NarrateError;

    fn try_from(doc: TemplateDocument) -> Result<Self, NarrateError> {
        if doc.format != TEMPLATES_FORMAT || doc.version != 1 {
            return Err(NarrateError::InvalidTemplates(format!(
                "unsupported document {} v{}",
                doc.format, doc.version
            )));
        }
        TemplateStore::new(doc.templates)
    }
}

impl From<TemplateStore> for TemplateDocument {
    fn from(t: TemplateStore) -> Self {
        TemplateDocument {
            format: TEMPLATES_FORMAT.into(),
            version: 1,
            templates: t.source,
        }
    }
}

impl Default for TemplateStore {
    fn default() -> Self {
        Self::from_json(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

fn parse(name: &str, text: &str) -> Result<Vec<Piece>, NarrateError> {
    let bad = |msg: &str| NarrateError::InvalidTemplates(format!("template `{name}`: {msg}"));
    let mut pieces = Vec::new();
    let mut literal = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                literal.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                literal.push('}');
            }
            '{' => {
                let mut slot = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) if ch.is_ascii_lowercase() || ch == '_' => slot.push(ch),
                        _ => return Err(bad("malformed slot")),
                    }
                }
                if slot.is_empty() {
                    return Err(bad("empty slot"));
                }
                if !literal.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut literal)));
                }
                pieces.push(Piece::Slot(slot));
            }
            '}' => return Err(bad("unmatched `}`")),
            _ => literal.push(c),
        }
    }
    if !literal.is_empty() {
        pieces.push(Piece::Text(literal));
    }
    Ok(pieces)
}

impl TemplateStore {
    pub fn new(templates: BTreeMap<String, String>) -> Result<Self, NarrateError> {
        let mut parsed = BTreeMap::new();
        for (name, text) in &templates {
            let allowed = TEMPLATE_SLOTS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, slots)| *slots)
                .ok_or_else(|| NarrateError::InvalidTemplates(format!("unknown template `{name}`")))?;
            let pieces = parse(name, text)?;
            for p in &pieces {
                if let Piece::Slot(s) = p {
                    if !allowed.contains(&s.as_str()) {
                        return Err(NarrateError::InvalidTemplates(format!(
                            "template `{name}` uses unknown slot `{{{s}}}`"
                        )));
                    }
                }
            }
            parsed.insert(name.clone(), pieces);
        }
        Ok(Self {
            source: templates,
            parsed,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, NarrateError> {
        serde_json::from_str(text).map_err(|e| NarrateError::InvalidTemplates(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("templates serialize")
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parsed.contains_key(name)
    }

    /// Fills `name` with `values`. Slots without a value render empty.
    pub fn render(&self, name: &str, values: &[(&str, &str)]) -> Result<String, NarrateError> {
        let pieces = self
            .parsed
            .get(name)
            .ok_or_else(|| NarrateError::MissingTemplate(name.to_string()))?;
        let mut out = String::new();
        for p in pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => {
                    if let Some((_, v)) = values.iter().find(|(k, _)| k == s) {
                        out.push_str(v);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(pairs: &[(&str, &str)]) -> Result<TemplateStore, NarrateError> {
        TemplateStore::new(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }

    #[test]
    fn bundled_templates_cover_everything() {
        let t = TemplateStore::default();
        for (name, _) in TEMPLATE_SLOTS {
            assert!(t.contains(name), "{name}");
        }
    }

    #[test]
    fn renders_slots_and_escapes() {
        let t = store(&[("support", "{{n}} = {samples} people")]).unwrap();
        assert_eq!(t.render("support", &[("samples", "19")]).unwrap(), "{n} = 19 people");
    }

    #[test]
    fn rejects_unknown_slots_and_names() {
        assert!(matches!(
            store(&[("support", "{count} people")]),
            Err(NarrateError::InvalidTemplates(_))
        ));
        assert!(matches!(store(&[("farewell", "bye")]), Err(NarrateError::InvalidTemplates(_))));
        assert!(store(&[("support", "{samples")]).is_err());
        assert!(store(&[("support", "samples}")]).is_err());
        let doc = r#"{"format":"riskweave.templates","version":1,"templates":{"support":"{bogus}"}}"#;
        assert!(TemplateStore::from_json(doc).is_err());
    }

    #[test]
    fn missing_template_on_use() {
        let t = store(&[("support", "{samples}")]).unwrap();
        assert_eq!(t.render("outcome", &[]), Err(NarrateError::MissingTemplate("outcome".into())));
    }

    #[test]
    fn json_round_trip() {
        let t = TemplateStore::default();
        assert_eq!(TemplateStore::from_json(&t.to_json()).unwrap(), t);
    }
}
