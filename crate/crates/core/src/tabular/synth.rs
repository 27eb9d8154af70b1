//! Synthetic stand-in for a coronary heart disease cohort.
//!
//! Thirteen patient features, of which only age band, cholesterol/HDL ratio
//! and daily alcohol intake drive the label. BMI and the others are present
//! but irrelevant, so explanations can show attributes the model never uses.

use serde::Serialize;

use super::{Dataset, FeatureSpec, Row, Schema, TabularError, TargetSpec, Value};
use crate::predicate::Predicate;
use crate::rng::SplitMix64;

pub const AGE: &str = "Age";
pub const CHOLESTEROL_HDL: &str = "Cholesterol HDL ratio";
pub const ALCOHOL: &str = "Daily alcohol consumption";
pub const BMI: &str = "BMI";
pub const CHD_TARGET: &str = "CHD risk";

const AGE_BANDS: [&str; 5] = ["20-35", "35-50", "50-65", "65-75", "75-90"];
const AGE_WEIGHTS: [f64; 5] = [0.20, 0.25, 0.25, 0.18, 0.12];
const ALCOHOL_THRESHOLD: f64 = 68.5;

const LOW: usize = 0;
const HIGH: usize = 1;

pub fn chd_schema() -> Schema {
    let yes_no = ["No", "Yes"];
    Schema::new(
        vec![
            FeatureSpec::categorical(AGE, AGE_BANDS),
            FeatureSpec::categorical("Sex", ["Female", "Male"]),
            FeatureSpec::categorical(CHOLESTEROL_HDL, ["Normal", "High"]),
            FeatureSpec::numeric(ALCOHOL, "ml/day"),
            FeatureSpec::numeric(BMI, "kg/m2"),
            FeatureSpec::numeric("Systolic blood pressure", "mmHg"),
            FeatureSpec::numeric("Diastolic blood pressure", "mmHg"),
            FeatureSpec::numeric("Triglycerides", "mmol/L"),
            FeatureSpec::categorical("Smoker", yes_no),
            FeatureSpec::categorical("Diabetes", yes_no),
            FeatureSpec::categorical("Blood pressure medication", yes_no),
            FeatureSpec::numeric("Heart rate", "bpm"),
            FeatureSpec::numeric("Height", "cm"),
        ],
        TargetSpec::new(CHD_TARGET, ["low risk", "high risk"], "high risk"),
    )
    .expect("built-in schema is valid")
}

/// One planted rule: a conjunction of predicates and the label it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedRule {
    pub conditions: Vec<Predicate>,
    pub label: String,
}

impl PlantedRule {
    pub fn applies(&self, schema: &Schema, instance: &[Value]) -> bool {
        self.conditions.iter().all(|p| p.holds(schema, instance))
    }
}

fn planted_rules() -> Vec<PlantedRule> {
    let rule = |conditions, label: &str| PlantedRule {
        conditions,
        label: label.into(),
    };
    vec![
        rule(
            vec![Predicate::not_equals(AGE, "65-75"), Predicate::not_equals(AGE, "75-90")],
            "low risk",
        ),
        rule(vec![Predicate::equals(AGE, "75-90")], "high risk"),
        rule(
            vec![Predicate::equals(AGE, "65-75"), Predicate::equals(CHOLESTEROL_HDL, "Normal")],
            "low risk",
        ),
        rule(
            vec![
                Predicate::equals(AGE, "65-75"),
                Predicate::equals(CHOLESTEROL_HDL, "High"),
                Predicate::less_than(ALCOHOL, ALCOHOL_THRESHOLD),
            ],
            "low risk",
        ),
        rule(
            vec![
                Predicate::equals(AGE, "65-75"),
                Predicate::equals(CHOLESTEROL_HDL, "High"),
                Predicate::greater_or_equal(ALCOHOL, ALCOHOL_THRESHOLD),
            ],
            "high risk",
        ),
    ]
}

/// Label implied by the planted rules for an instance of [`chd_schema`].
pub fn chd_planted_label(schema: &Schema, instance: &[Value]) -> Option<usize> {
    planted_rules()
        .iter()
        .find(|r| r.applies(schema, instance))
        .and_then(|r| schema.class_index(&r.label))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n: usize,
    /// Probability that a generated label is flipped.
    pub noise: f64,
}

impl SynthConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        Self { seed, n, noise: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub rules: Vec<PlantedRule>,
}

pub fn synthesize_chd_like(seed: u64, n: usize) -> Result<SyntheticData, TabularError> {
    synthesize_chd_like_with(SynthConfig::new(seed, n))
}

pub fn synthesize_chd_like_with(config: SynthConfig) -> Result<SyntheticData, TabularError> {
    if config.n < 100 {
        return Err(TabularError::NTooSmall(config.n));
    }
    if !(0.0..=1.0).contains(&config.noise) {
        return Err(TabularError::InvalidSchema(format!("noise {} outside [0, 1]", config.noise)));
    }
    let schema = chd_schema();
    let mut rng = SplitMix64::new(config.seed);
    let round1 = |x: f64| (x * 10.0).round() / 10.0;

    let mut rows = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let age = rng.categorical(&AGE_WEIGHTS);
        let sex = rng.below(2) as usize;
        let chol_high = rng.bernoulli(0.5);
        let alcohol = if rng.bernoulli(0.15) {
            0.0
        } else {
            (3.9 + 0.8 * rng.normal()).exp().round().min(400.0)
        };
        let bmi = round1((26.0 + 4.0 * rng.normal()).clamp(15.0, 55.0));
        let systolic = (130.0 + 18.0 * rng.normal()).round().clamp(80.0, 230.0);
        let diastolic = (80.0 + 10.0 * rng.normal()).round().clamp(40.0, 140.0);
        let triglycerides = round1((0.3 + 0.45 * rng.normal()).exp());
        let smoker = rng.bernoulli(0.2) as usize;
        let diabetes = rng.bernoulli(0.08) as usize;
        let bp_meds = rng.bernoulli(0.15) as usize;
        let heart_rate = (70.0 + 10.0 * rng.normal()).round().clamp(40.0, 140.0);
        let height = (170.0 + 9.0 * rng.normal()).round();

        let clean = match (AGE_BANDS[age], chol_high) {
            ("75-90", _) => HIGH,
            ("65-75", true) if alcohol >= ALCOHOL_THRESHOLD => HIGH,
            _ => LOW,
        };
        let label = if rng.bernoulli(config.noise) { 1 - clean } else { clean };

        rows.push(Row {
            values: vec![
                Value::Categorical(age),
                Value::Categorical(sex),
                Value::Categorical(chol_high as usize),
                Value::Numeric(alcohol),
                Value::Numeric(bmi),
                Value::Numeric(systolic),
                Value::Numeric(diastolic),
                Value::Numeric(triglycerides),
                Value::Categorical(smoker),
                Value::Categorical(diabetes),
                Value::Categorical(bp_meds),
                Value::Numeric(heart_rate),
                Value::Numeric(height),
            ],
            label,
        });
    }
    Ok(SyntheticData {
        dataset: Dataset {
            schema,
            rows,
            provenance: format!("synthetic-chd(seed={},n={},noise={})", config.seed, config.n, config.noise),
        },
        rules: planted_rules(),
    })
}
