use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::conditions::join_list;
use super::{NarrateError, TemplateStore};
use crate::tabular::Schema;

pub const LEXICON_FORMAT: &str = "riskweave.lexicon";
const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.json");

/// Lowercase, underscores as spaces, runs of whitespace collapsed.
pub fn normalize_attribute(name: &str) -> String {
    name.to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Alias table mapping everyday attribute names onto schema feature names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LexiconDocument", into = "LexiconDocument")]
pub struct Lexicon {
    aliases: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct LexiconDocument {
    format: String,
    version: u32,
    aliases: BTreeMap<String, String>,
}

impl TryFrom<LexiconDocument> for Lexicon {
    type Error = NarrateError;

    fn try_from(doc: LexiconDocument) -> Result<Self, NarrateError> {
        if doc.format != LEXICON_FORMAT || doc.version != 1 {
            return Err(NarrateError::InvalidLexicon(format!(
                "unsupported document {} v{}",
                doc.format, doc.version
            )));
        }
        Lexicon::new(doc.aliases)
    }
}

impl From<Lexicon> for LexiconDocument {
    fn from(l: Lexicon) -> Self {
        LexiconDocument {
            format: LEXICON_FORMAT.into(),
            version: 1,
            aliases: l.aliases,
        }
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

impl Lexicon {
    pub fn new(aliases: BTreeMap<String, String>) -> Result<Self, NarrateError> {
        let mut normalized = BTreeMap::new();
        for (alias, target) in aliases {
            let key = normalize_attribute(&alias);
            if key.is_empty() || target.trim().is_empty() {
                return Err(NarrateError::InvalidLexicon(format!("empty alias entry `{alias}`")));
            }
            if normalized.insert(key.clone(), target).is_some() {
                return Err(NarrateError::InvalidLexicon(format!("alias `{key}` defined twice")));
            }
        }
        Ok(Self { aliases: normalized })
    }

    pub fn empty() -> Self {
        Self {
            aliases: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, NarrateError> {
        serde_json::from_str(text).map_err(|e| NarrateError::InvalidLexicon(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    pub fn lookup(&self, name: &str) -> Option<&str> {
        self.aliases.get(&normalize_attribute(name)).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Schema feature names the asserted attributes resolved to.
    pub modeled: Vec<String>,
    /// Asserted attributes the model has no feature for, as the caller wrote them.
    pub unmodeled: Vec<String>,
    pub caveat_text: String,
}

/// Sorts asserted attributes into those the schema covers and those it does
/// not. Matching is case-insensitive, first against feature names directly and
/// then through the lexicon. Duplicates are dropped, first occurrence wins.
pub fn coverage_report(
    schema: &Schema,
    asserted: &[String],
    lexicon: &Lexicon,
    templates: &TemplateStore,
) -> Result<CoverageReport, NarrateError> {
    let resolve = |name: &str| -> Option<String> {
        let key = normalize_attribute(name);
        let direct = schema
            .features
            .iter()
            .find(|f| normalize_attribute(&f.name) == key)
            .map(|f| f.name.clone());
        direct.or_else(|| {
            let target = lexicon.lookup(name)?;
            schema
                .features
                .iter()
                .find(|f| normalize_attribute(&f.name) == normalize_attribute(target))
                .map(|f| f.name.clone())
        })
    };

    let mut modeled: Vec<String> = Vec::new();
    let mut unmodeled: Vec<String> = Vec::new();
    let mut seen_unmodeled: Vec<String> = Vec::new();
    for name in asserted {
        let trimmed = name.trim();
        if trimmed.is_empty() {
            continue;
        }
        match resolve(trimmed) {
            Some(feature) => {
                if !modeled.contains(&feature) {
                    modeled.push(feature);
                }
            }
            None => {
                let key = normalize_attribute(trimmed);
                if !seen_unmodeled.contains(&key) {
                    seen_unmodeled.push(key);
                    unmodeled.push(trimmed.to_string());
                }
            }
        }
    }

    let features: Vec<String> = schema.features.iter().map(|f| f.name.clone()).collect();
    let mut sentences = vec![templates.render("coverage_generic", &[("features", &join_list(&features, "and"))])?];
    for attribute in &unmodeled {
        sentences.push(templates.render("coverage_caveat", &[("attribute", attribute)])?);
    }

    Ok(CoverageReport {
        modeled,
        unmodeled,
        caveat_text: sentences.join(" "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::chd_schema;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bmi_is_modeled() {
        let r = coverage_report(&chd_schema(), &names(&["BMI"]), &Lexicon::default(), &TemplateStore::default()).unwrap();
        assert_eq!(r.modeled, names(&["BMI"]));
        assert!(r.unmodeled.is_empty());
    }

    #[test]
    fn aliases_and_case() {
        let r = coverage_report(
            &chd_schema(),
            &names(&["Smoking  Status", "body_mass_index", "bmi", "Family history", "family history"]),
            &Lexicon::default(),
            &TemplateStore::default(),
        )
        .unwrap();
        assert_eq!(r.modeled, names(&["Smoker", "BMI"]));
        assert_eq!(r.unmodeled, names(&["Family history"]));
        assert!(r.caveat_text.contains("does not take Family history into account"));
    }

    #[test]
    fn empty_assertions_give_generic_sentence() {
        let t = TemplateStore::default();
        let r = coverage_report(&chd_schema(), &[], &Lexicon::default(), &t).unwrap();
        assert!(r.modeled.is_empty() && r.unmodeled.is_empty());
        assert!(r.caveat_text.starts_with("This prediction only takes into account: Age, Sex"));
        assert!(!r.caveat_text.contains("does not take"));
    }

    #[test]
    fn lexicon_validation() {
        let l = Lexicon::default();
        assert_eq!(Lexicon::from_json(&l.to_json()).unwrap(), l);
        let dup = r#"{"format":"riskweave.lexicon","version":1,"aliases":{"BMI x":"BMI","bmi  x":"BMI"}}"#;
        assert!(Lexicon::from_json(dup).is_err());
        assert!(Lexicon::from_json(r#"{"format":"other","version":1,"aliases":{}}"#).is_err());
    }
}
