//! JSON model configuration and the factory that turns it into a gain model.

use serde::{Deserialize, Serialize};

use super::alp::{alp_global_model, alp_local_model};
use super::ilp::{ilp_global_model, ilp_global_sample, ilp_local_model};
use super::lda::{ILPAuxModel, LDAModel, Objective, PolicyKind, PolicySpec};
use super::pap::{pap_global_model, pap_local_model};
use crate::engine::{GainModel, Horizon, LognormalLocal};
use crate::error::{Error, Result};
use crate::kernels::{FrequencyModel, IGParams};

pub const DEFAULT_ILP_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityConfig {
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyName,
    pub param: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Ilp,
    Alp,
    Pap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    DEFAULT_ILP_SAMPLES
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: DEFAULT_ILP_SAMPLES,
            seed: 0,
        }
    }
}

/// Closed-form reference law used instead of a loss model and policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceConfig {
    Lognormal { mu: f64, sigma: f64 },
}

/// Everything needed to build a gain model and a horizon.
///
/// For the local individual-loss policy, `frequency` and `severity` describe
/// the retained-loss process itself and `policy.param` is not used by the
/// gain model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<SeverityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Horizon>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
}

impl ModelConfig {
    /// Parses JSON; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("line {} column {}: {}", e.line(), e.column(), e)))
    }

    pub fn objective(&self) -> Objective {
        self.objective.unwrap_or(Objective::Local)
    }

    pub fn horizon(&self) -> Result<Horizon> {
        let h = self.horizon.ok_or_else(|| Error::config("missing field `horizon`"))?;
        h.validate()?;
        Ok(h)
    }

    pub fn lda(&self) -> Result<LDAModel> {
        let f = self
            .frequency
            .ok_or_else(|| Error::config("missing field `frequency`"))?;
        let s = self.severity.ok_or_else(|| Error::config("missing field `severity`"))?;
        let freq = FrequencyModel::new(f.rate).map_err(as_config)?;
        let sev = IGParams::new(s.mu, s.lambda).map_err(as_config)?;
        Ok(LDAModel::new(freq, sev))
    }

    pub fn policy_spec(&self) -> Result<PolicySpec> {
        let p = self.policy.ok_or_else(|| Error::config("missing field `policy`"))?;
        let kind = match p.kind {
            PolicyName::Ilp => PolicyKind::Ilp(p.param),
            PolicyName::Alp => PolicyKind::Alp(p.param),
            PolicyName::Pap => PolicyKind::Pap(p.param),
        };
        PolicySpec::new(kind, self.objective())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    }
}

/// Builds the gain model a configuration describes.
pub fn build_gain_model(cfg: &ModelConfig) -> Result<Box<dyn GainModel>> {
    if let Some(ReferenceConfig::Lognormal { mu, sigma }) = cfg.reference {
        if cfg.objective() != Objective::Local {
            return Err(Error::config("the lognormal reference model is local only"));
        }
        return Ok(Box::new(LognormalLocal::new(mu, sigma).map_err(as_config)?));
    }
    let lda = cfg.lda()?;
    let spec = cfg.policy_spec()?;
    Ok(match (spec.kind, spec.objective) {
        (PolicyKind::Alp(cap), Objective::Local) => Box::new(alp_local_model(&lda, cap)?),
        (PolicyKind::Alp(cap), Objective::Global) => Box::new(alp_global_model(&lda, cap)?),
        (PolicyKind::Pap(a), Objective::Local) => Box::new(pap_local_model(&lda, a)?),
        (PolicyKind::Pap(a), Objective::Global) => Box::new(pap_global_model(&lda, a)?),
        (PolicyKind::Ilp(_), Objective::Local) => {
            Box::new(ilp_local_model(&ILPAuxModel::new(lda.frequency.rate, lda.severity)?)?)
        }
        (PolicyKind::Ilp(tcl), Objective::Global) => {
            let sample = ilp_global_sample(&lda, tcl, cfg.mc.samples, cfg.mc.seed)?;
            Box::new(ilp_global_model(sample)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ModelConfig::from_json(
            r#"{"frequency":{"rate":3},"severity":{"mu":2,"lambda":3},
                "policy":{"kind":"alp","param":10},"objective":"global",
                "horizon":{"T":8,"k":3},"mc":{"samples":1000,"seed":4}}"#,
        )
        .unwrap();
        assert_eq!(cfg.horizon().unwrap(), Horizon::new(8, 3).unwrap());
        assert_eq!(cfg.policy_spec().unwrap().kind, PolicyKind::Alp(10.0));
        let m = build_gain_model(&cfg).unwrap();
        assert!(m.mean_gain() > 0.0);
    }

    #[test]
    fn reference_model() {
        let cfg = ModelConfig::from_json(r#"{"reference":{"kind":"lognormal","mu":0,"sigma":1}}"#).unwrap();
        let m = build_gain_model(&cfg).unwrap();
        assert!((m.mean_gain() + 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn errors_are_config_errors_with_position() {
        match ModelConfig::from_json("{\n \"frequency\": {\"rate\": }\n}") {
            Err(Error::Config(msg)) => assert!(msg.starts_with("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let unknown = ModelConfig::from_json(r#"{"frequncy":{"rate":1}}"#);
        assert!(matches!(unknown, Err(Error::Config(_))));
        let neg = ModelConfig::from_json(
            r#"{"frequency":{"rate":-1},"severity":{"mu":1,"lambda":1},"policy":{"kind":"pap","param":3}}"#,
        )
        .unwrap();
        assert!(matches!(build_gain_model(&neg), Err(Error::Config(_))));
        let missing = ModelConfig::from_json(r#"{"frequency":{"rate":1}}"#).unwrap();
        assert!(matches!(build_gain_model(&missing), Err(Error::Config(_))));
    }
}
