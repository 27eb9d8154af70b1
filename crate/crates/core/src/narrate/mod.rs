//! Narrative explanations of tree predictions.
//!
//! Everything here is a pure function of its inputs: a prediction (or a
//! tree), the verbal map, and the template store.

mod conditions;
mod coverage;
mod explain;
mod templates;
mod whatif;

pub use conditions::{decision_path_conditions, format_number, join_list, render_condition, Condition, ConditionKind};
pub use coverage::{coverage_report, normalize_attribute, CoverageReport, Lexicon, LEXICON_FORMAT};
pub use explain::{global_summary, narrate_prediction, Explanation, GlobalRule, GlobalSummary};
pub use templates::{TemplateStore, TEMPLATES_FORMAT, TEMPLATE_SLOTS};
pub use whatif::{default_immutable, what_if, what_if_with, Change, Counterfactual, WhatIfOptions};

use crate::cart::CartError;
use crate::verbal::{VerbalError, VerbalMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NarrateError {
    #[error("invalid template document: {0}")]
    InvalidTemplates(String),
    #[error("template `{0}` is missing")]
    MissingTemplate(String),
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("unknown class label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Verbal(#[from] VerbalError),
    #[error(transparent)]
    Cart(#[from] CartError),
}

impl NarrateError {
    pub fn code(&self) -> &'static str {
        match self {
            NarrateError::InvalidTemplates(_) => "InvalidTemplates",
            NarrateError::MissingTemplate(_) => "MissingTemplate",
            NarrateError::InvalidLexicon(_) => "InvalidLexicon",
            NarrateError::UnknownLabel(_) => "UnknownLabel",
            NarrateError::Verbal(e) => e.code(),
            NarrateError::Cart(e) => e.code(),
        }
    }
}

/// The three documents narration reads, bundled for callers that serve many requests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Narrator {
    pub map: VerbalMap,
    pub templates: TemplateStore,
    pub lexicon: Lexicon,
}
