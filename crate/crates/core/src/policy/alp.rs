//! Aggregate-loss policy: the insurer pays `min{cap, Z}` each claimed year,
//! the retained loss is `(Z - cap)^+`.

use super::lda::{CompoundIg, LDAModel};
use super::{integrate_checked, MixedLaw};
use crate::engine::{GainModel, SignRegime};
use crate::error::{Error, Result};
use crate::kernels::QuadratureSpec;

fn check_cap(cap: f64) -> Result<()> {
    if !(cap > 0.0) || cap.is_nan() {
        return Err(Error::config(format!("ALP cap must be positive, got {cap}")));
    }
    Ok(())
}

/// Atom and continuous-part weights of the retained loss `(Z - cap)^+`.
///
/// `c0 = P[Z <= cap]`; `cm[m-1] = p_m P[S_m > cap]` is the mass of the
/// continuous part coming from `N = m`, whose density is `p_m f_{S_m}(z + cap)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ALPWeights {
    pub c0: f64,
    pub cm: Vec<f64>,
}

fn alp_weights(c: &CompoundIg, cap: f64) -> Result<ALPWeights> {
    let mut c0 = c.pmf[0];
    let mut cm = Vec::with_capacity(c.m_max());
    for m in 1..=c.m_max() {
        c0 += c.pmf[m] * c.cdf(m, cap)?;
        cm.push(c.pmf[m] * c.sf(m, cap)?);
    }
    Ok(ALPWeights { c0, cm })
}

/// Local objective, `W = -(Z - cap)^+`.
#[derive(Debug, Clone)]
pub struct AlpLocal {
    law: CompoundIg,
    cap: f64,
    weights: ALPWeights,
    mean: f64,
    quad: QuadratureSpec,
}

pub fn alp_local_model(lda: &LDAModel, cap: f64) -> Result<AlpLocal> {
    check_cap(cap)?;
    let law = lda.compound()?;
    let weights = alp_weights(&law, cap)?;
    let mut retained = 0.0;
    for m in 1..=law.m_max() {
        retained += law.pmf[m] * law.stop_loss(m, cap)?;
    }
    Ok(AlpLocal {
        law,
        cap,
        weights,
        mean: -retained,
        quad: QuadratureSpec::default(),
    })
}

impl AlpLocal {
    pub fn weights(&self) -> &ALPWeights {
        &self.weights
    }

    /// `E[min{(Z - cap)^+, d}]`.
    pub fn limited_retained(&self, d: f64) -> Result<f64> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        let mut s = 0.0;
        for m in 1..=self.law.m_max() {
            s += self.law.pmf[m] * (self.law.stop_loss(m, self.cap)? - self.law.stop_loss(m, self.cap + d)?);
        }
        Ok(s)
    }

    /// Continuous-part density of the retained loss at `z > 0`.
    pub fn density(&self, z: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in 1..=self.law.m_max() {
            s += self.law.pmf[m] * self.law.pdf(m, z + self.cap)?;
        }
        Ok(s)
    }
}

impl GainModel for AlpLocal {
    fn mean_gain(&self) -> f64 {
        self.mean
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Local.check(c1, c2)?;
        if c2 == f64::NEG_INFINITY {
            return Ok(c1 + self.mean);
        }
        Ok(c1 - self.limited_retained((c1 - c2).max(0.0))?)
    }
}

impl MixedLaw for AlpLocal {
    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.weights.c0)]
    }

    fn continuous_mass(&self) -> Result<f64> {
        let upper = self.law.upper_support(1e-14)?;
        integrate_checked(|z| self.density(z), 0.0, upper, &[], &self.quad)
    }
}

/// Global objective, `W = min{cap, Z}`.
#[derive(Debug, Clone)]
pub struct AlpGlobal {
    law: CompoundIg,
    cap: f64,
    mean: f64,
    quad: QuadratureSpec,
}

pub fn alp_global_model(lda: &LDAModel, cap: f64) -> Result<AlpGlobal> {
    check_cap(cap)?;
    let law = lda.compound()?;
    let mut mean = 0.0;
    for m in 1..=law.m_max() {
        mean += law.pmf[m] * law.limited_mean(m, cap)?;
    }
    Ok(AlpGlobal {
        law,
        cap,
        mean,
        quad: QuadratureSpec::default(),
    })
}

impl AlpGlobal {
    /// Mass of the atom at `cap`: `sum_m p_m P[S_m > cap]`.
    pub fn cap_atom(&self) -> Result<f64> {
        let mut s = 0.0;
        for m in 1..=self.law.m_max() {
            s += self.law.pmf[m] * self.law.sf(m, self.cap)?;
        }
        Ok(s)
    }
}

impl GainModel for AlpGlobal {
    fn mean_gain(&self) -> f64 {
        self.mean
    }

    /// `c2 + E[(W - d)^+]` with `d = c2 - c1`, where
    /// `(min{cap, Z} - d)^+ = (Z - d)^+ - (Z - cap)^+` for `d < cap`.
    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Global.check(c1, c2)?;
        if c2 == f64::NEG_INFINITY {
            return Ok(c1 + self.mean);
        }
        let d = (c2 - c1).max(0.0);
        if d >= self.cap {
            return Ok(c2);
        }
        let mut s = 0.0;
        for m in 1..=self.law.m_max() {
            s += self.law.pmf[m] * (self.law.stop_loss(m, d)? - self.law.stop_loss(m, self.cap)?);
        }
        Ok(c2 + s)
    }
}

impl MixedLaw for AlpGlobal {
    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.law.pmf[0]), (self.cap, self.cap_atom().unwrap_or(f64::NAN))]
    }

    fn continuous_mass(&self) -> Result<f64> {
        let law = &self.law;
        let density = |w: f64| -> Result<f64> {
            let mut s = 0.0;
            for m in 1..=law.m_max() {
                s += law.pmf[m] * law.pdf(m, w)?;
            }
            Ok(s)
        };
        integrate_checked(density, 0.0, self.cap, &[], &self.quad)
    }
}
