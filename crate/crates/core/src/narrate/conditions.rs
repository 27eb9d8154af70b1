use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NarrateError, TemplateStore};
use crate::cart::PathStep;
use crate::predicate::Test;
use crate::tabular::{Schema, Value};

/// One feature's constraint after merging every path step that tests it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    #[serde(flatten)]
    pub kind: ConditionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ConditionKind {
    Is { level: String },
    NotIn { levels: Vec<String> },
    /// `lower <= x < upper`; either side may be open.
    Range { lower: Option<f64>, upper: Option<f64> },
    /// The path both requires and excludes a level; only hand-built trees
    /// produce this.
    Impossible,
}

impl Condition {
    pub fn holds(&self, schema: &Schema, instance: &[Value]) -> bool {
        let Some(i) = schema.feature_index(&self.feature) else {
            return false;
        };
        match (&self.kind, &instance[i]) {
            (ConditionKind::Is { level }, Value::Categorical(l)) => schema.level_name(i, *l) == Some(level.as_str()),
            (ConditionKind::NotIn { levels }, Value::Categorical(l)) => {
                schema.level_name(i, *l).is_some_and(|name| !levels.iter().any(|x| x == name))
            }
            (ConditionKind::Range { lower, upper }, Value::Numeric(x)) => {
                lower.is_none_or(|lo| *x >= lo) && upper.is_none_or(|hi| *x < hi)
            }
            _ => false,
        }
    }

    /// Whether any value can satisfy the condition.
    pub fn satisfiable(&self, schema: &Schema) -> bool {
        match &self.kind {
            ConditionKind::Is { .. } => true,
            ConditionKind::NotIn { levels } => schema
                .feature_index(&self.feature)
                .and_then(|i| schema.features[i].levels())
                .is_some_and(|all| all.iter().any(|l| !levels.contains(l))),
            ConditionKind::Range { lower: Some(lo), upper: Some(hi) } => lo < hi,
            ConditionKind::Range { .. } => true,
            ConditionKind::Impossible => false,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = &self.feature;
        match &self.kind {
            ConditionKind::Is { level } => write!(f, "{name} = {level}"),
            ConditionKind::NotIn { levels } if levels.len() == 1 => write!(f, "{name} \u{2260} {}", levels[0]),
            ConditionKind::NotIn { levels } => write!(f, "{name} not in {{{}}}", levels.join(", ")),
            ConditionKind::Range { lower: Some(lo), upper: Some(hi) } => write!(f, "{lo} \u{2264} {name} < {hi}"),
            ConditionKind::Range { lower: Some(lo), upper: None } => write!(f, "{name} \u{2265} {lo}"),
            ConditionKind::Range { lower: None, upper: Some(hi) } => write!(f, "{name} < {hi}"),
            ConditionKind::Range { lower: None, upper: None } => write!(f, "{name} is any value"),
            ConditionKind::Impossible => write!(f, "{name} has contradictory requirements"),
        }
    }
}

/// Groups a decision path by feature: categorical exclusions merge into one
/// "not in" set (or collapse into the single required level), numeric bounds
/// intersect into one interval. Features appear in order of first use.
pub fn decision_path_conditions(path: &[PathStep]) -> Vec<Condition> {
    let mut out: Vec<Condition> = Vec::new();
    for step in path {
        let p = &step.predicate;
        let pos = match out.iter().position(|c| c.feature == p.feature) {
            Some(i) => i,
            None => {
                let kind = match p.test {
                    Test::Equals { .. } | Test::NotEquals { .. } => ConditionKind::NotIn { levels: Vec::new() },
                    Test::LessThan { .. } | Test::GreaterOrEqual { .. } => ConditionKind::Range {
                        lower: None,
                        upper: None,
                    },
                };
                out.push(Condition {
                    feature: p.feature.clone(),
                    kind,
                });
                out.len() - 1
            }
        };
        let kind = &mut out[pos].kind;
        match (&p.test, step.branch) {
            (Test::Equals { level }, true) | (Test::NotEquals { level }, false) => {
                *kind = match kind {
                    ConditionKind::NotIn { levels } if !levels.contains(level) => ConditionKind::Is { level: level.clone() },
                    ConditionKind::Is { level: required } if required == level => ConditionKind::Is { level: level.clone() },
                    _ => ConditionKind::Impossible,
                };
            }
            (Test::Equals { level }, false) | (Test::NotEquals { level }, true) => match kind {
                ConditionKind::NotIn { levels } => {
                    if !levels.contains(level) {
                        levels.push(level.clone());
                    }
                }
                ConditionKind::Is { level: required } if required == level => *kind = ConditionKind::Impossible,
                _ => {}
            },
            (Test::LessThan { threshold }, true) | (Test::GreaterOrEqual { threshold }, false) => {
                if let ConditionKind::Range { upper, .. } = kind {
                    *upper = Some(upper.map_or(*threshold, |u| u.min(*threshold)));
                }
            }
            (Test::LessThan { threshold }, false) | (Test::GreaterOrEqual { threshold }, true) => {
                if let ConditionKind::Range { lower, .. } = kind {
                    *lower = Some(lower.map_or(*threshold, |l| l.max(*threshold)));
                }
            }
        }
    }
    out
}

/// Short human-readable number: integers without decimals, others with at
/// most two decimals and no trailing zeros.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{x:.0}");
    }
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn with_unit(schema: &Schema, feature: &str, x: f64) -> String {
    let unit = schema
        .feature_index(feature)
        .and_then(|i| schema.features[i].unit())
        .unwrap_or("");
    if unit.is_empty() {
        format_number(x)
    } else {
        format!("{} {unit}", format_number(x))
    }
}

/// Joins items as "a", "a and b", "a, b and c".
pub fn join_list(items: &[String], conjunction: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} {conjunction} {last}", init.join(", ")),
    }
}

/// Renders a condition through the matching `condition_*` template.
pub fn render_condition(schema: &Schema, templates: &TemplateStore, condition: &Condition) -> Result<String, NarrateError> {
    let feature = condition.feature.as_str();
    match &condition.kind {
        ConditionKind::Is { level } => templates.render("condition_is", &[("feature", feature), ("level", level)]),
        ConditionKind::NotIn { levels } => {
            // declaration order reads naturally ("65-75 or 75-90")
            let f = schema.feature_index(feature);
            let mut levels = levels.clone();
            levels.sort_by_key(|l| f.and_then(|f| schema.level_index(f, l)).unwrap_or(usize::MAX));
            let levels = join_list(&levels, "or");
            templates.render("condition_not_in", &[("feature", feature), ("levels", &levels)])
        }
        ConditionKind::Range { lower, upper } => {
            let lo = lower.map(|x| with_unit(schema, feature, x));
            let hi = upper.map(|x| with_unit(schema, feature, x));
            match (lo, hi) {
                (Some(lo), Some(hi)) => templates.render(
                    "condition_between",
                    &[("feature", feature), ("lower", &lo), ("upper", &hi)],
                ),
                (Some(lo), None) => templates.render("condition_at_least", &[("feature", feature), ("lower", &lo)]),
                (None, Some(hi)) => templates.render("condition_below", &[("feature", feature), ("upper", &hi)]),
                (None, None) => Ok(format!("{feature} is any value")),
            }
        }
        ConditionKind::Impossible => Ok(condition.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::Predicate;

    fn step(predicate: Predicate, branch: bool) -> PathStep {
        PathStep { predicate, branch }
    }

    #[test]
    fn merges_age_exclusions() {
        let path = [
            step(Predicate::not_equals("Age", "65-75"), true),
            step(Predicate::not_equals("Age", "75-90"), true),
        ];
        let c = decision_path_conditions(&path);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].to_string(), "Age not in {65-75, 75-90}");
    }

    #[test]
    fn equals_false_branch_is_exclusion() {
        let path = [
            step(Predicate::equals("Age", "75-90"), false),
            step(Predicate::equals("Age", "65-75"), false),
        ];
        let c = decision_path_conditions(&path);
        assert_eq!(
            c[0].kind,
            ConditionKind::NotIn {
                levels: vec!["75-90".into(), "65-75".into()]
            }
        );
    }

    #[test]
    fn empty_path() {
        assert!(decision_path_conditions(&[]).is_empty());
    }

    #[test]
    fn intersects_numeric_bounds() {
        let path = [
            step(Predicate::less_than("x", 10.0), true),
            step(Predicate::less_than("x", 5.0), false),
        ];
        let c = decision_path_conditions(&path);
        assert_eq!(c[0].to_string(), "5 \u{2264} x < 10");
        assert_eq!(
            c[0].kind,
            ConditionKind::Range {
                lower: Some(5.0),
                upper: Some(10.0)
            }
        );
    }

    #[test]
    fn required_level_absorbs_exclusions() {
        let path = [
            step(Predicate::equals("Age", "75-90"), false),
            step(Predicate::equals("Age", "65-75"), true),
            step(Predicate::less_than("x", 3.0), false),
        ];
        let c = decision_path_conditions(&path);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].kind, ConditionKind::Is { level: "65-75".into() });
        assert_eq!(c[1].feature, "x");
    }

    #[test]
    fn contradictions_are_kept() {
        let path = [
            step(Predicate::equals("Colour", "red"), true),
            step(Predicate::equals("Colour", "blue"), true),
        ];
        assert_eq!(decision_path_conditions(&path)[0].kind, ConditionKind::Impossible);
        let path = [
            step(Predicate::not_equals("Colour", "red"), true),
            step(Predicate::equals("Colour", "red"), true),
        ];
        assert_eq!(decision_path_conditions(&path)[0].kind, ConditionKind::Impossible);
        let path = [
            step(Predicate::equals("Colour", "red"), true),
            step(Predicate::equals("Colour", "red"), false),
        ];
        assert_eq!(decision_path_conditions(&path)[0].kind, ConditionKind::Impossible);
    }

    #[test]
    fn numbers_and_lists() {
        assert_eq!(format_number(68.5), "68.5");
        assert_eq!(format_number(70.0), "70");
        assert_eq!(format_number(23.450000000000003), "23.45");
        assert_eq!(format_number(-0.001), "0");
        assert_eq!(join_list(&["a".into()], "and"), "a");
        assert_eq!(join_list(&["a".into(), "b".into(), "c".into()], "and"), "a, b and c");
    }

    #[test]
    fn renders_with_units() {
        let schema = crate::tabular::chd_schema();
        let t = TemplateStore::default();
        let c = Condition {
            feature: "Daily alcohol consumption".into(),
            kind: ConditionKind::Range {
                lower: None,
                upper: Some(68.5),
            },
        };
        assert_eq!(
            render_condition(&schema, &t, &c).unwrap(),
            "Daily alcohol consumption is below 68.5 ml/day"
        );
        let c = Condition {
            feature: "Age".into(),
            kind: ConditionKind::NotIn {
                levels: vec!["65-75".into(), "75-90".into()],
            },
        };
        assert_eq!(render_condition(&schema, &t, &c).unwrap(), "Age is not 65-75 or 75-90");
    }
}
