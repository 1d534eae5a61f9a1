//! Named experiment presets and the full rule-comparison pipeline.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::batch::{simulate_auxiliary_batch, simulate_batch, ScenarioBatch};
use super::rules::{
    compare_rules, mean_and_stderr, price_proxy, stopping_time_distribution, ComparisonRule, RuleReport,
    StoppingTimeDistribution,
};
use crate::engine::{compute_value_table, GainModel, Horizon, ValueTable};
use crate::error::{Error, Result};
use crate::kernels::IGParams;
use crate::policy::config::DEFAULT_ILP_SAMPLES;
use crate::policy::{
    alp_global_model, alp_local_model, ilp_global_model, ilp_global_sample, ilp_local_model, pap_global_model,
    pap_local_model, ILPAuxModel, LDAModel, Objective, PolicyKind, PolicySpec,
};

/// Compound Poisson IG parameters `(lambda, mu, rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossParams {
    pub lambda: f64,
    pub mu: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum LossSource {
    /// Losses before insurance; the policy is applied to each year.
    Original {
        #[serde(flatten)]
        params: LossParams,
        policy: PolicyKind,
    },
    /// The retained process of the individual-loss policy, modelled directly.
    Retained {
        #[serde(flatten)]
        params: LossParams,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPreset {
    pub name: String,
    pub loss: LossSource,
    pub objectives: Vec<Objective>,
    pub horizon: Horizon,
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    pub deterministic_years: Vec<usize>,
    /// Offline sample size for the global individual-loss gain.
    #[serde(default = "default_gain_samples")]
    pub gain_samples: usize,
}

fn default_gain_samples() -> usize {
    DEFAULT_ILP_SAMPLES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    AlpStudy,
    PapStudy,
    IlpStudy,
}

impl PresetName {
    pub const ALL: [PresetName; 3] = [PresetName::AlpStudy, PresetName::PapStudy, PresetName::IlpStudy];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::AlpStudy => "alp-study",
            PresetName::PapStudy => "pap-study",
            PresetName::IlpStudy => "ilp-study",
        }
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            Error::config(format!(
                "unknown preset `{s}` (expected alp-study, pap-study or ilp-study)"
            ))
        })
    }
}

impl ExperimentPreset {
    pub fn named(name: PresetName) -> Self {
        let horizon = Horizon { years: 8, k: 3 };
        let both = vec![Objective::Local, Objective::Global];
        let (loss, objectives, paths) = match name {
            PresetName::AlpStudy => (
                LossSource::Original {
                    params: LossParams {
                        lambda: 3.0,
                        mu: 2.0,
                        rate: 3.0,
                    },
                    policy: PolicyKind::Alp(10.0),
                },
                both,
                50_000,
            ),
            PresetName::PapStudy => (
                LossSource::Original {
                    params: LossParams {
                        lambda: 1.0,
                        mu: 1.0,
                        rate: 3.0,
                    },
                    policy: PolicyKind::Pap(3.0),
                },
                both,
                10_000,
            ),
            PresetName::IlpStudy => (
                LossSource::Retained {
                    params: LossParams {
                        lambda: 3.0,
                        mu: 1.0,
                        rate: 4.0,
                    },
                },
                vec![Objective::Local],
                10_000,
            ),
        };
        ExperimentPreset {
            name: name.as_str().into(),
            loss,
            objectives,
            horizon,
            paths,
            seed: 0,
            deterministic_years: vec![1, 5, 8],
            gain_samples: DEFAULT_ILP_SAMPLES,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ExperimentPreset = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.horizon.validate()?;
        if self.paths < 2 {
            return Err(Error::config("an experiment needs at least two paths"));
        }
        if self.objectives.is_empty() {
            return Err(Error::config("an experiment needs at least one objective"));
        }
        if let LossSource::Retained { .. } = self.loss {
            if self.objectives.contains(&Objective::Global) {
                return Err(Error::config(
                    "a directly modelled retained process supports the local objective only",
                ));
            }
        }
        self.lda()?;
        Ok(())
    }

    /// Law of the simulated loss process.
    pub fn lda(&self) -> Result<LDAModel> {
        let p = match self.loss {
            LossSource::Original { params, .. } | LossSource::Retained { params } => params,
        };
        LDAModel::from_params(p.lambda, p.mu, p.rate).map_err(|e| match e {
            Error::Domain(m) => Error::Config(m),
            other => other,
        })
    }

    fn gain_model(&self, objective: Objective) -> Result<Box<dyn GainModel>> {
        let lda = self.lda()?;
        Ok(match (self.loss, objective) {
            (LossSource::Retained { .. }, Objective::Local) => {
                Box::new(ilp_local_model(&ILPAuxModel::new(lda.frequency.rate, lda.severity)?)?)
            }
            (LossSource::Retained { .. }, Objective::Global) => {
                return Err(Error::config("global objective needs the original loss process"))
            }
            (LossSource::Original { policy, .. }, obj) => {
                match (policy, obj) {
                    (PolicyKind::Alp(c), Objective::Local) => Box::new(alp_local_model(&lda, c)?),
                    (PolicyKind::Alp(c), Objective::Global) => Box::new(alp_global_model(&lda, c)?),
                    (PolicyKind::Pap(a), Objective::Local) => Box::new(pap_local_model(&lda, a)?),
                    (PolicyKind::Pap(a), Objective::Global) => Box::new(pap_global_model(&lda, a)?),
                    (PolicyKind::Ilp(_), Objective::Local) => return Err(Error::config(
                        "the local individual-loss study models the retained process directly; use process `retained`",
                    )),
                    (PolicyKind::Ilp(tcl), Objective::Global) => {
                        let sample = ilp_global_sample(&lda, tcl, self.gain_samples, self.seed ^ 0x11b)?;
                        Box::new(ilp_global_model(sample)?)
                    }
                }
            }
        })
    }

    fn batch(&self, objective: Objective) -> Result<ScenarioBatch> {
        let (years, m) = (self.horizon.years, self.paths);
        match self.loss {
            LossSource::Retained { params } => {
                let aux = ILPAuxModel::new(params.rate, IGParams::new(params.mu, params.lambda)?)?;
                simulate_auxiliary_batch(&aux, years, m, self.seed)
            }
            LossSource::Original { policy, .. } => {
                simulate_batch(&self.lda()?, PolicySpec::new(policy, objective)?, years, m, self.seed)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub cap: f64,
    pub probability: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveStudy {
    pub objective: Objective,
    pub value_table: ValueTable,
    pub rules: RuleReport,
    pub stopping_times: StoppingTimeDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_proxy: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub preset: ExperimentPreset,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceedance: Option<Exceedance>,
    pub studies: Vec<ObjectiveStudy>,
}

impl ExperimentReport {
    pub fn study(&self, objective: Objective) -> Option<&ObjectiveStudy> {
        self.studies.iter().find(|s| s.objective == objective)
    }

    pub fn optimal_beats_all(&self) -> bool {
        self.studies.iter().all(|s| s.rules.optimal_beats_all())
    }

    pub fn hist_csv(&self) -> String {
        let mut out = String::from("objective,rule,bin_lo,bin_hi,count\n");
        for s in &self.studies {
            for o in &s.rules.outcomes {
                let h = &o.histogram;
                for (i, c) in h.counts.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        objective_name(s.objective),
                        o.name,
                        h.edges[i],
                        h.edges[i + 1],
                        c
                    ));
                }
            }
        }
        out
    }

    pub fn triples_csv(&self) -> String {
        let k = self.preset.horizon.k;
        let taus: Vec<String> = (1..=k).map(|i| format!("tau{i}")).collect();
        let mut out = format!("objective,{},count,frequency\n", taus.join(","));
        for s in &self.studies {
            for p in &s.stopping_times.patterns {
                let ts: Vec<String> = p.taus.iter().map(|t| t.to_string()).collect();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    objective_name(s.objective),
                    ts.join(","),
                    p.count,
                    p.frequency
                ));
            }
        }
        out
    }
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Local => "local",
        Objective::Global => "global",
    }
}

fn exceedance(batch: &ScenarioBatch, cap: f64) -> Exceedance {
    let per_path: Vec<f64> = (0..batch.paths)
        .map(|i| batch.path_z(i).iter().filter(|&&z| z > cap).count() as f64 / batch.years as f64)
        .collect();
    let (probability, stderr) = mean_and_stderr(&per_path);
    Exceedance {
        cap,
        probability,
        stderr,
    }
}

pub fn run_experiment(preset: &ExperimentPreset) -> Result<ExperimentReport> {
    preset.validate()?;
    let lda = preset.lda()?;
    let rules = [
        ComparisonRule::Deterministic(preset.deterministic_years.clone()),
        ComparisonRule::Random,
        ComparisonRule::Average,
    ];
    let mut studies = Vec::new();
    let mut exceed = None;
    for &objective in &preset.objectives {
        let model = preset.gain_model(objective)?;
        let table = compute_value_table(&model, preset.horizon)?;
        let batch = preset.batch(objective)?;
        if let LossSource::Original {
            policy: PolicyKind::Alp(cap),
            ..
        } = preset.loss
        {
            exceed.get_or_insert_with(|| exceedance(&batch, cap));
        }
        let report = compare_rules(&batch, &table, &lda, &rules)?;
        let stopping_times = stopping_time_distribution(&batch, &table)?;
        let proxy = match objective {
            Objective::Global => Some(price_proxy(&batch, &table)?),
            Objective::Local => None,
        };
        studies.push(ObjectiveStudy {
            objective,
            value_table: table,
            rules: report,
            stopping_times,
            price_proxy: proxy,
        });
    }
    Ok(ExperimentReport {
        preset: preset.clone(),
        exceedance: exceed,
        studies,
    })
}
