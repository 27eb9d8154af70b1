//! Seeded synthetic IVF cohort drawn from a known discrete-time model.

use serde::Serialize;

use super::{linear_predictor, logistic, CycleModel, CycleRecord, CyclesError, EncodedColumn, Encoding, Observation};
use crate::rng::SplitMix64;
use crate::tabular::{FeatureSpec, Schema, TargetSpec, Value};

pub const IVF_TARGET: &str = "Live birth";
pub const MAX_CYCLES: usize = 6;

const TRANSFER_LEVELS: [&str; 3] = [
    "Stage 2 embryos transferred on day 2 or 3",
    "Blastocyst transferred on day 5 or 6",
    "No embryos transferred",
];

/// The example patient: 34 years old, no years of infertility, one egg
/// collected, day 2-3 transfer, no previous pregnancy, no tubal infertility,
/// IVF, embryos frozen.
pub const FIG4_RECORD: &str = r#"{
  "Age": 34,
  "Years of infertility": 0,
  "Number of eggs collected": 1,
  "Type of embryo transfer": "Stage 2 embryos transferred on day 2 or 3",
  "Previous pregnancy": "No",
  "Tubal infertility": "No",
  "First cycle type": "IVF",
  "Embryos frozen": "Yes"
}"#;

pub fn ivf_schema() -> Schema {
    let yes_no = ["No", "Yes"];
    Schema::new(
        vec![
            FeatureSpec::numeric("Age", "years"),
            FeatureSpec::numeric("Years of infertility", "years"),
            FeatureSpec::numeric("Number of eggs collected", ""),
            FeatureSpec::categorical("Type of embryo transfer", TRANSFER_LEVELS),
            FeatureSpec::categorical("Previous pregnancy", yes_no),
            FeatureSpec::categorical("Tubal infertility", yes_no),
            FeatureSpec::categorical("First cycle type", ["IVF", "ICSI"]),
            FeatureSpec::categorical("Embryos frozen", yes_no),
        ],
        TargetSpec::new(IVF_TARGET, ["No", "Yes"], "Yes"),
    )
    .expect("IVF schema is valid")
}

/// Population-level standardization and the generating parameters.
fn true_model() -> CycleModel {
    let schema = ivf_schema();
    let mut encoding = Encoding::identity(&schema);
    for c in &mut encoding.columns {
        if let EncodedColumn::Standardized { feature, mean, scale } = c {
            (*mean, *scale) = match feature.as_str() {
                "Age" => (34.0, 4.5),
                "Years of infertility" => (3.0, 2.5),
                _ => (8.0, 5.0),
            };
        }
    }
    // Age, years, eggs, blastocyst, no transfer, previous pregnancy, tubal, ICSI, frozen
    let weights = vec![-0.6, -0.25, 0.45, 0.35, -1.2, 0.3, -0.2, 0.1, 0.3];
    let intercepts = vec![-1.0, -1.15, -1.3, -1.45, -1.6, -1.75];
    CycleModel::new(schema, encoding, weights, intercepts).expect("generating model is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvfPatient {
    pub features: Vec<Value>,
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticIvf {
    /// Person-period records, patients in generation order.
    pub records: Vec<CycleRecord>,
    pub patients: Vec<IvfPatient>,
    /// The model the outcomes were drawn from.
    pub true_model: CycleModel,
}

fn draw_features(rng: &mut SplitMix64) -> Vec<Value> {
    let clamp_round = |x: f64, lo: f64, hi: f64| x.round().clamp(lo, hi);
    vec![
        Value::Numeric(clamp_round(34.0 + 4.5 * rng.normal(), 20.0, 46.0)),
        Value::Numeric(clamp_round((3.0 + 2.5 * rng.normal()).abs(), 0.0, 15.0)),
        Value::Numeric(clamp_round(8.0 + 5.0 * rng.normal(), 0.0, 35.0)),
        Value::Categorical(rng.categorical(&[0.55, 0.35, 0.10])),
        Value::Categorical(usize::from(rng.bernoulli(0.30))),
        Value::Categorical(usize::from(rng.bernoulli(0.20))),
        Value::Categorical(usize::from(rng.bernoulli(0.45))),
        Value::Categorical(usize::from(rng.bernoulli(0.35))),
    ]
}

/// Generates whole patients until at least `min_records` person-period
/// records exist. After each failed cycle a patient stops with probability
/// 0.2 (censoring); nobody goes past six cycles.
pub fn synthesize_ivf(seed: u64, min_records: usize) -> Result<SyntheticIvf, CyclesError> {
    let model = true_model();
    let mut rng = SplitMix64::new(seed);
    let mut records = Vec::with_capacity(min_records + MAX_CYCLES);
    let mut patients = Vec::new();
    while records.len() < min_records {
        let features = draw_features(&mut rng);
        let mut observation = Observation::Censored(MAX_CYCLES);
        for t in 1..=MAX_CYCLES {
            let p = logistic(linear_predictor(&model, &features, t)?);
            let success = rng.bernoulli(p);
            records.push(CycleRecord {
                features: features.clone(),
                cycle: t,
                outcome: success,
            });
            if success {
                observation = Observation::Success(t);
                break;
            }
            if t < MAX_CYCLES && rng.bernoulli(0.2) {
                observation = Observation::Censored(t);
                break;
            }
        }
        patients.push(IvfPatient { features, observation });
    }
    Ok(SyntheticIvf {
        records,
        patients,
        true_model: model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_follow_patients() {
        let d = synthesize_ivf(9, 1000).unwrap();
        assert!(d.records.len() >= 1000);
        let total: usize = d
            .patients
            .iter()
            .map(|p| match p.observation {
                Observation::Success(t) | Observation::Censored(t) => t,
            })
            .sum();
        assert_eq!(total, d.records.len());
        assert!(d.records.iter().all(|r| (1..=MAX_CYCLES).contains(&r.cycle)));
        assert_eq!(synthesize_ivf(9, 1000).unwrap(), d);
    }

    #[test]
    fn fig4_record_parses() {
        let schema = ivf_schema();
        let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(FIG4_RECORD).unwrap();
        let x = schema.instance_from_json(&obj).unwrap();
        assert_eq!(x[0], Value::Numeric(34.0));
        assert_eq!(x[3], Value::Categorical(0));
    }
}
