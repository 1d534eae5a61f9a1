//! Loss-generating laws and policy descriptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::poisson::POISSON_TAIL;
use crate::kernels::{ig_cdf, ig_partial_moment, ig_pdf, ig_sf, ig_sum_params, FrequencyModel, IGParams};

/// Annual loss `Z = X_1 + ... + X_N`, `N ~ Poisson`, `X_n ~ IG` i.i.d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LDAModel {
    pub frequency: FrequencyModel,
    pub severity: IGParams,
    pub m_max: usize,
}

impl LDAModel {
    pub fn new(frequency: FrequencyModel, severity: IGParams) -> Self {
        LDAModel {
            frequency,
            severity,
            m_max: frequency.m_max(),
        }
    }

    /// Convenience constructor from `(lambda, mu, rate)`.
    pub fn from_params(lambda: f64, mu: f64, rate: f64) -> Result<Self> {
        Ok(Self::new(FrequencyModel::new(rate)?, IGParams::new(mu, lambda)?))
    }

    /// Explicit truncation; rejected when the Poisson tail beyond `m_max` is
    /// not below `1e-10`.
    pub fn with_truncation(frequency: FrequencyModel, severity: IGParams, m_max: usize) -> Result<Self> {
        let tail = frequency.sf(m_max);
        if tail >= POISSON_TAIL {
            return Err(Error::config(format!(
                "truncation m_max={m_max} leaves Poisson tail {tail:e} >= {POISSON_TAIL:e}"
            )));
        }
        Ok(LDAModel {
            frequency,
            severity,
            m_max,
        })
    }

    pub fn validate(&self) -> Result<()> {
        FrequencyModel::new(self.frequency.rate)?;
        IGParams::new(self.severity.mu, self.severity.lambda)?;
        Self::with_truncation(self.frequency, self.severity, self.m_max).map(|_| ())
    }

    /// `E[Z] = lambda_N mu`.
    pub fn mean_loss(&self) -> f64 {
        self.frequency.rate * self.severity.mu
    }

    pub(crate) fn compound(&self) -> Result<CompoundIg> {
        self.validate()?;
        CompoundIg::new(self.frequency, self.severity, self.m_max)
    }
}

/// The post-insurance process of the individual-loss policy, modelled
/// directly as its own compound Poisson IG law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ILPAuxModel {
    pub aux_rate: f64,
    pub aux_severity: IGParams,
}

impl ILPAuxModel {
    pub fn new(aux_rate: f64, aux_severity: IGParams) -> Result<Self> {
        FrequencyModel::new(aux_rate)?;
        IGParams::new(aux_severity.mu, aux_severity.lambda)?;
        Ok(ILPAuxModel { aux_rate, aux_severity })
    }

    pub fn as_lda(&self) -> Result<LDAModel> {
        Ok(LDAModel::new(FrequencyModel::new(self.aux_rate)?, self.aux_severity))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum PolicyKind {
    /// Each loss capped at the total cover limit `tcl`.
    Ilp(f64),
    /// Aggregate annual loss covered up to `cap`.
    Alp(f64),
    /// Losses after the running sum first exceeds the attachment are covered.
    Pap(f64),
}

impl PolicyKind {
    pub fn param(&self) -> f64 {
        match *self {
            PolicyKind::Ilp(x) | PolicyKind::Alp(x) | PolicyKind::Pap(x) => x,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Ilp(_) => "ilp",
            PolicyKind::Alp(_) => "alp",
            PolicyKind::Pap(_) => "pap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub objective: Objective,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, objective: Objective) -> Result<Self> {
        let p = kind.param();
        if !(p > 0.0) || p.is_nan() {
            return Err(Error::config(format!(
                "{} parameter must be positive, got {p}",
                kind.name()
            )));
        }
        Ok(PolicySpec { kind, objective })
    }

    /// Insured (retained) loss of one year given its individual losses, straight
    /// from the policy definitions.
    pub fn insured_loss(&self, losses: &[f64]) -> f64 {
        match self.kind {
            PolicyKind::Ilp(tcl) => losses.iter().map(|&x| (x - tcl).max(0.0)).sum(),
            PolicyKind::Alp(cap) => (losses.iter().sum::<f64>() - cap).max(0.0),
            PolicyKind::Pap(att) => {
                let mut s = 0.0;
                for &x in losses {
                    if s + x > att {
                        break;
                    }
                    s += x;
                }
                s
            }
        }
    }
}

/// Poisson weights and per-count IG sum laws up to the truncation index.
#[derive(Debug, Clone)]
pub(crate) struct CompoundIg {
    pub pmf: Vec<f64>,
    pub severity: IGParams,
    sums: Vec<IGParams>,
}

impl CompoundIg {
    pub fn new(freq: FrequencyModel, severity: IGParams, m_max: usize) -> Result<Self> {
        let pmf = (0..=m_max).map(|m| freq.pmf(m)).collect();
        let sums = (1..=m_max).map(|m| ig_sum_params(m, severity)).collect::<Result<_>>()?;
        Ok(CompoundIg { pmf, severity, sums })
    }

    pub fn m_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn sum(&self, m: usize) -> IGParams {
        self.sums[m - 1]
    }

    /// `P(N >= j)` within the truncation.
    pub fn count_sf(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.pmf.len() + 1];
        for j in (0..self.pmf.len()).rev() {
            q[j] = q[j + 1] + self.pmf[j];
        }
        q
    }

    pub fn cdf(&self, m: usize, x: f64) -> Result<f64> {
        if m == 0 {
            return Ok(if x >= 0.0 { 1.0 } else { 0.0 });
        }
        ig_cdf(x.max(0.0), self.sum(m))
    }

    pub fn sf(&self, m: usize, x: f64) -> Result<f64> {
        if m == 0 {
            return Ok(if x >= 0.0 { 0.0 } else { 1.0 });
        }
        ig_sf(x.max(0.0), self.sum(m))
    }

    pub fn pdf(&self, m: usize, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        ig_pdf(x, self.sum(m))
    }

    /// `E[S_m; S_m <= x]`.
    pub fn partial_moment(&self, m: usize, x: f64) -> Result<f64> {
        if m == 0 {
            return Ok(0.0);
        }
        ig_partial_moment(x.max(0.0), self.sum(m))
    }

    /// `E[(S_m - x)^+]` for `x >= 0`.
    pub fn stop_loss(&self, m: usize, x: f64) -> Result<f64> {
        if m == 0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        let upper = m as f64 * self.severity.mu - self.partial_moment(m, x)?;
        Ok((upper - x * self.sf(m, x)?).max(0.0))
    }

    /// `E[min{S_m, d}]`.
    pub fn limited_mean(&self, m: usize, d: f64) -> Result<f64> {
        if m == 0 {
            return Ok(0.0);
        }
        Ok(m as f64 * self.severity.mu - self.stop_loss(m, d)?)
    }

    /// Point where every `S_m` beyond it has negligible first-moment tail.
    pub fn upper_support(&self, tol: f64) -> Result<f64> {
        let m = self.m_max().max(1);
        let mean = m as f64 * self.severity.mu;
        let mut x = mean.max(1.0);
        while self.stop_loss(m, x)? + x * self.sf(m, x)? > tol {
            x *= 2.0;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insured_losses_by_definition() {
        let xs = [1.0, 2.5, 0.5, 4.0];
        let ilp = PolicySpec::new(PolicyKind::Ilp(2.0), Objective::Local).unwrap();
        assert_eq!(ilp.insured_loss(&xs), 0.5 + 2.0);
        let alp = PolicySpec::new(PolicyKind::Alp(5.0), Objective::Local).unwrap();
        assert_eq!(alp.insured_loss(&xs), 3.0);
        let pap = PolicySpec::new(PolicyKind::Pap(3.2), Objective::Local).unwrap();
        assert_eq!(pap.insured_loss(&xs), 1.0);
        let pap = PolicySpec::new(PolicyKind::Pap(3.6), Objective::Local).unwrap();
        assert_eq!(pap.insured_loss(&xs), 3.5);
        assert_eq!(pap.insured_loss(&[]), 0.0);
    }

    #[test]
    fn policy_param_positive() {
        assert!(PolicySpec::new(PolicyKind::Alp(0.0), Objective::Global).is_err());
        assert!(PolicySpec::new(PolicyKind::Pap(f64::NAN), Objective::Global).is_err());
    }

    #[test]
    fn truncation_guard() {
        let f = FrequencyModel::new(3.0).unwrap();
        let s = IGParams::new(1.0, 1.0).unwrap();
        assert!(LDAModel::with_truncation(f, s, 5).is_err());
        assert!(LDAModel::with_truncation(f, s, 40).is_ok());
        assert!(LDAModel::new(f, s).validate().is_ok());
    }

    #[test]
    fn stop_loss_identities() {
        let lda = LDAModel::from_params(3.0, 2.0, 3.0).unwrap();
        let c = lda.compound().unwrap();
        for m in 1..5 {
            assert!((c.stop_loss(m, 0.0).unwrap() - 2.0 * m as f64).abs() < 1e-12);
            assert!(c.stop_loss(m, 1e6).unwrap() < 1e-12);
            let q = c.count_sf();
            assert!((q[0] - 1.0).abs() < 1e-9 && q[m] < 1.0);
        }
    }

    #[test]
    fn policy_json_shape() {
        let p: PolicySpec =
            serde_json::from_str(r#"{"kind":{"kind":"alp","param":10.0},"objective":"global"}"#).unwrap();
        assert_eq!(p.kind, PolicyKind::Alp(10.0));
        assert_eq!(p.objective, Objective::Global);
    }
}
