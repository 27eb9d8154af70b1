use serde::{Deserialize, Serialize};

use super::conditions::{decision_path_conditions, join_list, render_condition, Condition};
use super::{NarrateError, TemplateStore};
use crate::cart::{DecisionTree, Prediction, TreeNode};
use crate::tabular::Schema;
use crate::verbal::{verbalize, VerbalMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub conditions: Vec<Condition>,
    /// Rendered form of each condition, in the same order, as it appears in `text`.
    pub condition_texts: Vec<String>,
    pub label: String,
    pub certainty_phrase: String,
    pub text: String,
    pub samples: u64,
    pub confidence_p: f64,
}

/// Outcome sentence, reasons sentence (omitted for an empty path) and support
/// sentence, joined by single spaces.
pub fn narrate_prediction(
    schema: &Schema,
    prediction: &Prediction,
    accuracy: f64,
    map: &VerbalMap,
    templates: &TemplateStore,
) -> Result<Explanation, NarrateError> {
    let certainty = verbalize(map, accuracy, prediction.confidence_p)?;
    let conditions = decision_path_conditions(&prediction.path);
    let condition_texts = conditions
        .iter()
        .map(|c| render_condition(schema, templates, c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut sentences = vec![templates.render(
        "outcome",
        &[("certainty", &certainty), ("label", &prediction.label)],
    )?];
    if !condition_texts.is_empty() {
        let joined = join_list(&condition_texts, "and");
        sentences.push(templates.render("reasons", &[("conditions", &joined)])?);
    }
    sentences.push(templates.render("support", &[("samples", &prediction.samples.to_string())])?);

    Ok(Explanation {
        conditions,
        condition_texts,
        label: prediction.label.clone(),
        certainty_phrase: certainty,
        text: sentences.join(" "),
        samples: prediction.samples,
        confidence_p: prediction.confidence_p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRule {
    pub conditions: Vec<Condition>,
    pub label: String,
    pub samples: u64,
    pub confidence_p: f64,
    pub certainty_phrase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    /// One rule per leaf, most populated first.
    pub rules: Vec<GlobalRule>,
    /// Features the tree actually splits on.
    pub features: Vec<String>,
    pub text: String,
}

/// Every leaf as a rule, sorted by sample count (stable, so equal counts keep
/// depth-first order), followed by the model-scope sentence.
pub fn global_summary(
    tree: &DecisionTree,
    accuracy: f64,
    map: &VerbalMap,
    templates: &TemplateStore,
) -> Result<GlobalSummary, NarrateError> {
    let mut leaves = Vec::new();
    tree.root.for_each_leaf(|path, leaf| leaves.push((decision_path_conditions(path), leaf)));

    let mut rules = Vec::with_capacity(leaves.len());
    for (conditions, leaf) in leaves {
        let TreeNode::Leaf {
            label,
            samples,
            confidence_p,
            ..
        } = leaf
        else {
            unreachable!("for_each_leaf visits leaves only")
        };
        rules.push(GlobalRule {
            conditions,
            label: label.clone(),
            samples: *samples,
            confidence_p: *confidence_p,
            certainty_phrase: verbalize(map, accuracy, *confidence_p)?,
        });
    }
    rules.sort_by_key(|r| std::cmp::Reverse(r.samples));

    let mut lines = vec![templates.render(
        "global_intro",
        &[
            ("train_size", &tree.train_size.to_string()),
            ("rules", &rules.len().to_string()),
        ],
    )?];
    for (i, rule) in rules.iter().enumerate() {
        let index = (i + 1).to_string();
        let samples = rule.samples.to_string();
        let line = if rule.conditions.is_empty() {
            templates.render(
                "global_rule_unconditional",
                &[
                    ("index", &index),
                    ("label", &rule.label),
                    ("certainty", &rule.certainty_phrase),
                    ("samples", &samples),
                ],
            )?
        } else {
            let texts = rule
                .conditions
                .iter()
                .map(|c| render_condition(&tree.schema, templates, c))
                .collect::<Result<Vec<_>, _>>()?;
            templates.render(
                "global_rule",
                &[
                    ("index", &index),
                    ("conditions", &join_list(&texts, "and")),
                    ("label", &rule.label),
                    ("certainty", &rule.certainty_phrase),
                    ("samples", &samples),
                ],
            )?
        };
        lines.push(line);
    }

    let features: Vec<String> = tree.used_features().into_iter().map(str::to_string).collect();
    lines.push(if features.is_empty() {
        templates.render("model_scope_empty", &[])?
    } else {
        templates.render("model_scope", &[("features", &join_list(&features, "and"))])?
    });

    Ok(GlobalSummary {
        rules,
        features,
        text: lines.join("\n"),
    })
}
