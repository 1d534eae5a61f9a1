//! Claiming rules applied to simulated paths, and their summaries.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::ScenarioBatch;
use crate::engine::{run_with_thresholds, Thresholds, ValueTable};
use crate::error::{Error, Result};
use crate::kernels::sampling::stream;
use crate::policy::{LDAModel, Objective};

/// One-sided 1% critical value of the standard normal.
pub const Z_ONE_PERCENT: f64 = 2.326_347_874;

const RANDOM_RULE_SALT: u64 = 0x5eed_0f2a_11d0;
const HISTOGRAM_BINS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "years", rename_all = "lowercase")]
pub enum ComparisonRule {
    Optimal,
    /// Fixed claim years, 1-based.
    Deterministic(Vec<usize>),
    /// Uniform over increasing `k`-subsets of the years.
    Random,
    /// Claim once the gain reaches its mean, or when forced.
    Average,
}

impl ComparisonRule {
    pub fn name(&self) -> String {
        match self {
            ComparisonRule::Optimal => "optimal".into(),
            ComparisonRule::Deterministic(ys) => {
                let ys: Vec<String> = ys.iter().map(|y| y.to_string()).collect();
                format!("deterministic({})", ys.join("-"))
            }
            ComparisonRule::Random => "random".into(),
            ComparisonRule::Average => "average".into(),
        }
    }

    fn validate(&self, years: usize, k: usize) -> Result<()> {
        if let ComparisonRule::Deterministic(ys) = self {
            let increasing = ys.windows(2).all(|w| w[0] < w[1]);
            if ys.len() != k
                || !increasing
                || ys.first().is_some_and(|&y| y < 1)
                || ys.last().is_some_and(|&y| y > years)
            {
                return Err(Error::config(format!(
                    "deterministic years {ys:?} must be {k} strictly increasing values in 1..={years}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Paired comparison of a rule against the optimal rule, in objective
/// (loss) units: positive differences favour the optimal rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub mean_difference: f64,
    pub stderr: f64,
    pub z: f64,
    pub pooled_stderr: f64,
    pub optimal_beats: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: ComparisonRule,
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub histogram: Histogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub versus_optimal: Option<PairedComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLines {
    /// `v^{T,k}` from the value table.
    pub dp_value: f64,
    /// Expected objective of the optimal rule implied by the table.
    pub solid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub objective: Objective,
    pub paths: usize,
    pub years: usize,
    pub k: usize,
    pub reference: ReferenceLines,
    pub outcomes: Vec<RuleOutcome>,
}

impl RuleReport {
    pub fn outcome(&self, name: &str) -> Option<&RuleOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// Whether the optimal rule beats every other rule at the 1% level.
    pub fn optimal_beats_all(&self) -> bool {
        self.outcomes
            .iter()
            .filter_map(|o| o.versus_optimal)
            .all(|c| c.optimal_beats)
    }
}

fn check_shapes(batch: &ScenarioBatch, table: &ValueTable) -> Result<()> {
    let h = table.horizon();
    if batch.years != h.years {
        return Err(Error::config(format!(
            "batch has {} years but the value table has T = {}",
            batch.years, h.years
        )));
    }
    Ok(())
}

fn claim_years(
    rule: &ComparisonRule,
    w: &[f64],
    thresholds: &Thresholds,
    mean_gain: f64,
    seed: u64,
    path: usize,
) -> Result<Vec<usize>> {
    let h = thresholds.horizon();
    Ok(match rule {
        ComparisonRule::Optimal => run_with_thresholds(w, thresholds)?.taus,
        ComparisonRule::Deterministic(ys) => ys.clone(),
        ComparisonRule::Random => {
            let mut rng = stream(seed ^ RANDOM_RULE_SALT, path as u64);
            let mut ys: Vec<usize> = sample(&mut rng, h.years, h.k).into_iter().map(|y| y + 1).collect();
            ys.sort_unstable();
            ys
        }
        ComparisonRule::Average => {
            let mut ys = Vec::with_capacity(h.k);
            for (t, &g) in w.iter().enumerate() {
                let left = h.k - ys.len();
                if left == 0 {
                    break;
                }
                if g >= mean_gain || h.years - t == left {
                    ys.push(t + 1);
                }
            }
            ys
        }
    })
}

fn objective_value(batch: &ScenarioBatch, path: usize, taus: &[usize]) -> f64 {
    let w = batch.path_w(path);
    let claimed: f64 = taus.iter().map(|&t| w[t - 1]).sum();
    match batch.objective {
        Objective::Global => batch.path_z(path).iter().sum::<f64>() - claimed,
        Objective::Local => -claimed,
    }
}

/// Claim years and objective value of every path under `rule`.
pub fn apply_rule(batch: &ScenarioBatch, table: &ValueTable, rule: &ComparisonRule) -> Result<Vec<(Vec<usize>, f64)>> {
    check_shapes(batch, table)?;
    let h = table.horizon();
    rule.validate(h.years, h.k)?;
    let thresholds = table.thresholds();
    let mean_gain = table.value(1, 1).unwrap_or(f64::NAN);
    (0..batch.paths)
        .into_par_iter()
        .map(|i| {
            let taus = claim_years(rule, batch.path_w(i), &thresholds, mean_gain, batch.seed, i)?;
            let v = objective_value(batch, i, &taus);
            Ok((taus, v))
        })
        .collect()
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn reference_lines(table: &ValueTable, lda: &LDAModel, objective: Objective) -> ReferenceLines {
    let v = table.game_value();
    let solid = match objective {
        Objective::Global => lda.mean_loss() * table.horizon().years as f64 - v,
        // the objective is a retained loss, the negative of the collected gain
        Objective::Local => -v,
    };
    ReferenceLines { dp_value: v, solid }
}

/// Runs every rule on the batch. The optimal rule is always included and
/// placed first.
pub fn compare_rules(
    batch: &ScenarioBatch,
    table: &ValueTable,
    lda: &LDAModel,
    rules: &[ComparisonRule],
) -> Result<RuleReport> {
    let mut all = vec![ComparisonRule::Optimal];
    all.extend(rules.iter().filter(|r| **r != ComparisonRule::Optimal).cloned());
    let values: Vec<Vec<f64>> = all
        .iter()
        .map(|r| Ok(apply_rule(batch, table, r)?.into_iter().map(|(_, v)| v).collect()))
        .collect::<Result<_>>()?;
    let lo = values.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (_, opt_se) = mean_and_stderr(&values[0]);
    let outcomes = all
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(j, (rule, vals))| {
            let (mean, stderr) = mean_and_stderr(vals);
            let versus_optimal = (j > 0).then(|| {
                let diffs: Vec<f64> = vals.iter().zip(&values[0]).map(|(a, b)| a - b).collect();
                let (d, se) = mean_and_stderr(&diffs);
                let z = if se > 0.0 {
                    d / se
                } else if d > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                PairedComparison {
                    mean_difference: d,
                    stderr: se,
                    z,
                    pooled_stderr: stderr.hypot(opt_se),
                    optimal_beats: z > Z_ONE_PERCENT,
                }
            });
            RuleOutcome {
                rule: rule.clone(),
                name: rule.name(),
                mean,
                stderr,
                histogram: Histogram::build(vals, lo, hi, HISTOGRAM_BINS),
                versus_optimal,
            }
        })
        .collect();
    let h = table.horizon();
    Ok(RuleReport {
        objective: batch.objective,
        paths: batch.paths,
        years: h.years,
        k: h.k,
        reference: reference_lines(table, lda, batch.objective),
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimPattern {
    pub taus: Vec<usize>,
    pub count: usize,
    pub frequency: f64,
}

/// Empirical law of the optimal claim years, most frequent first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingTimeDistribution {
    pub paths: usize,
    pub patterns: Vec<ClaimPattern>,
}

impl StoppingTimeDistribution {
    pub fn frequency(&self, taus: &[usize]) -> f64 {
        self.patterns
            .iter()
            .find(|p| p.taus == taus)
            .map_or(0.0, |p| p.frequency)
    }
}

pub fn stopping_time_distribution(batch: &ScenarioBatch, table: &ValueTable) -> Result<StoppingTimeDistribution> {
    let runs = apply_rule(batch, table, &ComparisonRule::Optimal)?;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (taus, _) in runs {
        *counts.entry(taus).or_default() += 1;
    }
    let m = batch.paths as f64;
    let mut patterns: Vec<ClaimPattern> = counts
        .into_iter()
        .map(|(taus, count)| ClaimPattern {
            taus,
            count,
            frequency: count as f64 / m,
        })
        .collect();
    patterns.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.taus.cmp(&b.taus)));
    Ok(StoppingTimeDistribution {
        paths: batch.paths,
        patterns,
    })
}

/// Mean and standard error of the covered amount collected by the optimal
/// rule on a global-objective batch.
pub fn price_proxy(batch: &ScenarioBatch, table: &ValueTable) -> Result<(f64, f64)> {
    if batch.objective != Objective::Global {
        return Err(Error::config("the price proxy needs a global-objective batch"));
    }
    let runs = apply_rule(batch, table, &ComparisonRule::Optimal)?;
    let collected: Vec<f64> = runs
        .iter()
        .enumerate()
        .map(|(i, (taus, _))| taus.iter().map(|&t| batch.path_w(i)[t - 1]).sum())
        .collect();
    Ok(mean_and_stderr(&collected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compute_value_table, Horizon};
    use crate::policy::{alp_global_model, alp_local_model, PolicyKind, PolicySpec};
    use crate::sim::simulate_batch;

    fn setup(objective: Objective) -> (LDAModel, ScenarioBatch, ValueTable) {
        let lda = LDAModel::from_params(3.0, 2.0, 3.0).unwrap();
        let spec = PolicySpec::new(PolicyKind::Alp(10.0), objective).unwrap();
        let h = Horizon::new(8, 3).unwrap();
        let table = match objective {
            Objective::Local => compute_value_table(&alp_local_model(&lda, 10.0).unwrap(), h),
            Objective::Global => compute_value_table(&alp_global_model(&lda, 10.0).unwrap(), h),
        }
        .unwrap();
        (lda, simulate_batch(&lda, spec, 8, 2000, 9).unwrap(), table)
    }

    #[test]
    fn deterministic_years_are_used() {
        let (_, batch, table) = setup(Objective::Local);
        let runs = apply_rule(&batch, &table, &ComparisonRule::Deterministic(vec![1, 5, 8])).unwrap();
        assert!(runs.iter().all(|(t, _)| t == &vec![1, 5, 8]));
    }

    #[test]
    fn every_rule_claims_k_times() {
        let (_, batch, table) = setup(Objective::Global);
        for rule in [ComparisonRule::Optimal, ComparisonRule::Random, ComparisonRule::Average] {
            for (taus, _) in apply_rule(&batch, &table, &rule).unwrap() {
                assert_eq!(taus.len(), 3, "{rule:?}");
                assert!(taus.windows(2).all(|w| w[0] < w[1]) && taus[0] >= 1 && taus[2] <= 8);
            }
        }
    }

    #[test]
    fn invalid_rules_and_shapes() {
        let (lda, batch, table) = setup(Objective::Local);
        for ys in [vec![1, 1, 2], vec![0, 2, 3], vec![2, 3, 9], vec![1, 2]] {
            assert!(apply_rule(&batch, &table, &ComparisonRule::Deterministic(ys)).is_err());
        }
        let other = compute_value_table(&alp_local_model(&lda, 10.0).unwrap(), Horizon::new(7, 3).unwrap()).unwrap();
        assert!(matches!(
            compare_rules(&batch, &other, &lda, &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn histogram_mass_and_accounting() {
        let (lda, batch, table) = setup(Objective::Global);
        let rules = [ComparisonRule::Random, ComparisonRule::Average];
        let report = compare_rules(&batch, &table, &lda, &rules).unwrap();
        for o in &report.outcomes {
            assert_eq!(o.histogram.total(), batch.paths);
        }
        for (i, (taus, v)) in apply_rule(&batch, &table, &ComparisonRule::Random)
            .unwrap()
            .iter()
            .enumerate()
        {
            let claimed: f64 = taus.iter().map(|&t| batch.path_w(i)[t - 1]).sum();
            let total: f64 = batch.path_z(i).iter().sum();
            assert!((v + claimed - total).abs() <= 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn price_proxy_needs_global() {
        let (_, batch, table) = setup(Objective::Local);
        assert!(price_proxy(&batch, &table).is_err());
        let (_, batch, table) = setup(Objective::Global);
        let (p, _) = price_proxy(&batch, &table).unwrap();
        assert!(p >= 0.0);
    }

    #[test]
    fn pattern_frequencies_sum_to_one() {
        let (_, batch, table) = setup(Objective::Local);
        let d = stopping_time_distribution(&batch, &table).unwrap();
        let s: f64 = d.patterns.iter().map(|p| p.frequency).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(d.patterns.iter().all(|p| p.taus.len() == 3 && p.taus[2] <= 8));
    }
}
