//! Interpretable risk models with communicated uncertainty.
//!
//! * [`tabular`]: schemas, CSV ingestion, seeded splits, synthetic CHD-like data.
//! * [`cart`]: Gini CART learner with chi-square leaf confidence.
//! * [`metrics`]: confusion-matrix metrics and reliability diagrams.
//! * [`verbal`]: verbal certainty phrases and probability framings.
//! * [`narrate`]: decision-path narratives, global summaries, what-if and coverage reports.
//! * [`cycles`]: discrete-time logistic model of repeated treatment cycles.

pub mod api;
pub mod artifact;
pub mod cart;
pub mod cycles;
pub mod metrics;
pub mod narrate;
pub mod predicate;
pub mod rng;
pub mod stats;
pub mod tabular;
pub mod verbal;

pub use artifact::{Artifact, ArtifactError, ModelEnvelope};
pub use cart::{predict, train, DecisionTree, PathStep, Prediction, TrainParams, TreeNode};
pub use cycles::{fit, predict_curve, CumulativeCurve, CycleModel, CycleRecord, FitConfig};
pub use metrics::{evaluate, reliability, ConfusionMatrix, ReliabilityBin, ReliabilityDiagram};
pub use narrate::{
    coverage_report, decision_path_conditions, global_summary, narrate_prediction, what_if, Condition, CoverageReport,
    Counterfactual, Explanation, Lexicon, Narrator, TemplateStore,
};
pub use predicate::{Predicate, Test};
pub use rng::SplitMix64;
pub use stats::chi_square_sf;
pub use tabular::{Dataset, FeatureKind, FeatureSpec, Row, Schema, TargetSpec, Value};
pub use verbal::{format_probability, verbalize, ProbabilityStyle, VerbalMap};
