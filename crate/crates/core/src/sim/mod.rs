//! Monte Carlo scenarios and the rule-comparison experiments.

mod batch;
mod experiment;
mod rules;

pub use batch::{simulate_auxiliary_batch, simulate_batch, ScenarioBatch};
pub use experiment::{
    run_experiment, Exceedance, ExperimentPreset, ExperimentReport, LossParams, LossSource, ObjectiveStudy, PresetName,
};
pub use rules::{
    apply_rule, compare_rules, price_proxy, reference_lines, stopping_time_distribution, ClaimPattern, ComparisonRule,
    Histogram, PairedComparison, ReferenceLines, RuleOutcome, RuleReport, StoppingTimeDistribution, Z_ONE_PERCENT,
};
