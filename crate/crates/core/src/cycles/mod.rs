//! Discrete-time logistic model over repeated treatment cycles.
//!
//! Each patient contributes one person-period record per attempted cycle:
//! outcome 0 for every failed cycle and 1 for the cycle that succeeded. The
//! per-cycle success probability is `logistic(α_t + w·x)`, and the cumulative
//! curve is `C_t = 1 - Π_{s≤t} (1 - p_s)`.

mod encoding;
mod fit;
mod records_csv;
mod synth;

pub use encoding::{EncodedColumn, Encoding};
pub use records_csv::{records_from_csv, records_to_csv, CYCLE_COLUMN};
pub use fit::{fit, gradient, objective, Design, FitConfig, FitReport};
pub use synth::{ivf_schema, synthesize_ivf, IvfPatient, SyntheticIvf, FIG4_RECORD, IVF_TARGET, MAX_CYCLES};

use serde::{Deserialize, Serialize};

use crate::narrate::{NarrateError, TemplateStore};
use crate::tabular::{Schema, TabularError, Value};
use crate::verbal::{format_probability, ProbabilityStyle, VerbalError};

pub const CYCLES_FORMAT: &str = "riskweave.cycles";
pub const CYCLES_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CyclesError {
    #[error("no records to fit")]
    NoData,
    #[error("no records for cycle {cycle}")]
    EmptyCycle { cycle: usize },
    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("cycle {cycle} outside 1..={max}")]
    CycleOutOfRange { cycle: usize, max: usize },
    #[error("no comparable pairs")]
    NoComparablePairs,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Verbal(#[from] VerbalError),
    #[error(transparent)]
    Narrate(#[from] NarrateError),
}

impl CyclesError {
    pub fn code(&self) -> &'static str {
        match self {
            CyclesError::NoData => "NoData",
            CyclesError::EmptyCycle { .. } => "EmptyCycle",
            CyclesError::NotConverged { .. } => "NotConverged",
            CyclesError::CycleOutOfRange { .. } => "CycleOutOfRange",
            CyclesError::NoComparablePairs => "NoComparablePairs",
            CyclesError::InvalidModel(_) => "InvalidModel",
            CyclesError::InvalidConfig(_) => "InvalidConfig",
            CyclesError::Tabular(e) => e.code(),
            CyclesError::Verbal(e) => e.code(),
            CyclesError::Narrate(e) => e.code(),
        }
    }
}

/// One patient-cycle: the patient's features, which attempt this is, and
/// whether it succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub features: Vec<Value>,
    pub cycle: usize,
    pub outcome: bool,
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct CycleModel {
    pub schema: Schema,
    pub encoding: Encoding,
    pub weights: Vec<f64>,
    /// α_1..α_T.
    pub intercepts: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    schema: Schema,
    encoding: Encoding,
    weights: Vec<f64>,
    intercepts: Vec<f64>,
}

impl TryFrom<ModelDocument> for CycleModel {
    type Error = CyclesError;

    fn try_from(doc: ModelDocument) -> Result<Self, CyclesError> {
        if doc.format != CYCLES_FORMAT || doc.version != CYCLES_VERSION {
            return Err(CyclesError::InvalidModel(format!(
                "unsupported document {} v{}",
                doc.format, doc.version
            )));
        }
        CycleModel::new(doc.schema, doc.encoding, doc.weights, doc.intercepts)
    }
}

impl From<CycleModel> for ModelDocument {
    fn from(m: CycleModel) -> Self {
        ModelDocument {
            format: CYCLES_FORMAT.into(),
            version: CYCLES_VERSION,
            schema: m.schema,
            encoding: m.encoding,
            weights: m.weights,
            intercepts: m.intercepts,
        }
    }
}

impl CycleModel {
    pub fn new(schema: Schema, encoding: Encoding, weights: Vec<f64>, intercepts: Vec<f64>) -> Result<Self, CyclesError> {
        encoding.check_covers(&schema)?;
        if intercepts.is_empty() {
            return Err(CyclesError::InvalidModel("at least one cycle intercept required".into()));
        }
        if weights.len() != encoding.width() {
            return Err(CyclesError::InvalidModel(format!(
                "{} weights for {} encoded columns",
                weights.len(),
                encoding.width()
            )));
        }
        if weights.iter().chain(&intercepts).any(|w| !w.is_finite()) {
            return Err(CyclesError::InvalidModel("non-finite parameter".into()));
        }
        Ok(Self {
            schema,
            encoding,
            weights,
            intercepts,
        })
    }

    pub fn max_cycles(&self) -> usize {
        self.intercepts.len()
    }

    fn check_cycle(&self, t: usize) -> Result<(), CyclesError> {
        if t == 0 || t > self.max_cycles() {
            return Err(CyclesError::CycleOutOfRange {
                cycle: t,
                max: self.max_cycles(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CyclesError> {
        serde_json::from_str(text).map_err(|e| CyclesError::InvalidModel(e.to_string()))
    }
}

/// `α_t + w·x(features)`.
pub fn linear_predictor(model: &CycleModel, features: &[Value], t: usize) -> Result<f64, CyclesError> {
    model.check_cycle(t)?;
    model.schema.check_instance(features)?;
    let x = model.encoding.encode(&model.schema, features);
    Ok(model.intercepts[t - 1] + dot(&model.weights, &x))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCurve {
    pub conditional: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl CumulativeCurve {
    /// Builds the cumulative series from per-cycle probabilities.
    pub fn from_conditional(conditional: Vec<f64>) -> Self {
        // C_t = C_{t-1} + (1 - C_{t-1}) p_t: the product form, written so that
        // a single cycle gives C_1 = p_1 exactly.
        let mut c = 0.0;
        let cumulative = conditional
            .iter()
            .map(|p| {
                c += (1.0 - c) * p;
                c
            })
            .collect();
        Self {
            conditional,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.conditional.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditional.is_empty()
    }

    /// `cycle,conditional_p,cumulative_p` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,conditional_p,cumulative_p\n");
        for (i, (p, c)) in self.conditional.iter().zip(&self.cumulative).enumerate() {
            out.push_str(&format!("{},{p},{c}\n", i + 1));
        }
        out
    }
}

pub fn predict_curve(model: &CycleModel, features: &[Value], n_cycles: usize) -> Result<CumulativeCurve, CyclesError> {
    model.check_cycle(n_cycles)?;
    model.schema.check_instance(features)?;
    let x = model.encoding.encode(&model.schema, features);
    let base = dot(&model.weights, &x);
    let conditional = model.intercepts[..n_cycles].iter().map(|a| logistic(a + base)).collect();
    Ok(CumulativeCurve::from_conditional(conditional))
}

/// What was seen for one held-out patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observation {
    /// Succeeded at this cycle.
    Success(usize),
    /// Failed this many cycles, then stopped.
    Censored(usize),
}

/// Harrell's C using the first-cycle probability as the score.
///
/// A pair is comparable when one patient succeeded at cycle `t` and the other
/// was still without success after cycle `t` (a later success, or censoring
/// after at least `t` failed cycles). It is concordant when the earlier
/// success has the higher score; tied scores count one half.
pub fn concordance_index(model: &CycleModel, held_out: &[(Vec<Value>, Observation)]) -> Result<f64, CyclesError> {
    let scores = held_out
        .iter()
        .map(|(f, _)| linear_predictor(model, f, 1).map(logistic))
        .collect::<Result<Vec<_>, _>>()?;
    let observations: Vec<Observation> = held_out.iter().map(|(_, o)| *o).collect();
    harrell_c(&scores, &observations)
}

/// Harrell's C over precomputed scores; see [`concordance_index`].
pub fn harrell_c(scores: &[f64], observations: &[Observation]) -> Result<f64, CyclesError> {
    let mut pairs = 0u64;
    let mut concordant = 0.0;
    for (i, oi) in observations.iter().enumerate() {
        let Observation::Success(ti) = *oi else { continue };
        for (j, oj) in observations.iter().enumerate() {
            let later = match *oj {
                Observation::Success(tj) => tj > ti,
                Observation::Censored(failed) => failed >= ti,
            };
            if i == j || !later {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                concordant += 1.0;
            } else if scores[i] == scores[j] {
                concordant += 0.5;
            }
        }
    }
    if pairs == 0 {
        return Err(CyclesError::NoComparablePairs);
    }
    Ok(concordant / pairs as f64)
}

/// One or two sentences about `C_t` in percentage and natural-frequency
/// framings; from the second cycle on the sentence says the chance is
/// combined over all cycles so far.
pub fn narrate_curve(curve: &CumulativeCurve, t: usize, outcome: &str, templates: &TemplateStore) -> Result<String, CyclesError> {
    if t == 0 || t > curve.len() {
        return Err(CyclesError::CycleOutOfRange {
            cycle: t,
            max: curve.len(),
        });
    }
    let c = curve.cumulative[t - 1];
    let percentage = format_probability(c, &ProbabilityStyle::Percentage)?;
    let frequency = format_probability(c, &ProbabilityStyle::NaturalFrequency { base: 100 })?;
    let text = if t == 1 {
        templates.render(
            "curve_single",
            &[("outcome", outcome), ("percentage", &percentage), ("frequency", &frequency)],
        )?
    } else {
        templates.render(
            "curve_cumulative",
            &[
                ("cycles", &t.to_string()),
                ("outcome", outcome),
                ("percentage", &percentage),
                ("frequency", &frequency),
            ],
        )?
    };
    Ok(text)
}
