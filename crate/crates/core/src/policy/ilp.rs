//! Individual-loss policy: each loss is covered up to the limit `tcl`.
//!
//! The local objective works on an auxiliary compound Poisson IG process
//! that directly models the retained losses. The global gain
//! `sum_n min{X_n, tcl}` has no closed form and is handled by an offline
//! sample that every `(c1, c2)` query reuses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lda::{CompoundIg, ILPAuxModel, LDAModel};
use super::{integrate_checked, MixedLaw};
use crate::engine::{compute_value_table, GainModel, Horizon, SignRegime, ValueTable};
use crate::error::{Error, Result};
use crate::kernels::sampling::{sample_count, sample_ig, stream};
use crate::kernels::QuadratureSpec;

/// Local objective, `W = -Z_aux`.
#[derive(Debug, Clone)]
pub struct IlpLocal {
    law: CompoundIg,
    mean: f64,
    quad: QuadratureSpec,
}

pub fn ilp_local_model(aux: &ILPAuxModel) -> Result<IlpLocal> {
    let law = aux.as_lda()?.compound()?;
    Ok(IlpLocal {
        law,
        mean: -aux.aux_rate * aux.aux_severity.mu,
        quad: QuadratureSpec::default(),
    })
}

impl IlpLocal {
    /// `E[min{Z_aux, d}]`.
    pub fn limited_retained(&self, d: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in 1..=self.law.m_max() {
            s += self.law.pmf[m] * self.law.limited_mean(m, d)?;
        }
        Ok(s)
    }
}

impl GainModel for IlpLocal {
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

impl MixedLaw for IlpLocal {
    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.law.pmf[0])]
    }

    fn continuous_mass(&self) -> Result<f64> {
        let law = &self.law;
        let upper = law.upper_support(1e-14)?;
        let density = |z: f64| -> Result<f64> {
            let mut s = 0.0;
            for m in 1..=law.m_max() {
                s += law.pmf[m] * law.pdf(m, z)?;
            }
            Ok(s)
        };
        integrate_checked(density, 0.0, upper, &[], &self.quad)
    }
}

/// Offline draws of the global gain `W = sum_{n<=N} min{X_n, tcl}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalGainSample {
    pub draws: Vec<f64>,
    pub seed: u64,
    pub tcl: f64,
}

/// Draw `i` uses its own stream, so the sample does not depend on the number
/// of worker threads.
pub fn ilp_global_sample(lda: &LDAModel, tcl: f64, samples: usize, seed: u64) -> Result<EmpiricalGainSample> {
    lda.validate()?;
    if !(tcl > 0.0) || tcl.is_nan() {
        return Err(Error::config(format!("ILP limit must be positive, got {tcl}")));
    }
    if samples == 0 {
        return Err(Error::config("ILP sample size must be at least 1"));
    }
    let draws = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let n = sample_count(lda.frequency, &mut rng);
            (0..n).map(|_| sample_ig(lda.severity, &mut rng).min(tcl)).sum()
        })
        .collect();
    Ok(EmpiricalGainSample { draws, seed, tcl })
}

/// Empirical-mean gain model over a stored sample.
#[derive(Debug, Clone)]
pub struct IlpGlobal {
    sample: EmpiricalGainSample,
    mean: f64,
}

pub fn ilp_global_model(sample: EmpiricalGainSample) -> Result<IlpGlobal> {
    if sample.draws.is_empty() {
        return Err(Error::config("empty ILP gain sample"));
    }
    if sample.draws.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::config("ILP gain sample has negative or non-finite draws"));
    }
    let mean = sample.draws.iter().sum::<f64>() / sample.draws.len() as f64;
    Ok(IlpGlobal { sample, mean })
}

impl IlpGlobal {
    pub fn sample(&self) -> &EmpiricalGainSample {
        &self.sample
    }

    /// Empirical `E[max{c1 + W, c2}]` and its standard error.
    pub fn expected_max_with_stderr(&self, c1: f64, c2: f64) -> Result<(f64, f64)> {
        SignRegime::Global.check(c1, c2)?;
        let n = self.sample.draws.len() as f64;
        let vals = self.sample.draws.iter().map(|&w| (c1 + w).max(c2));
        let (s, s2) = vals.fold((0.0, 0.0), |(s, s2), v| (s + v, s2 + v * v));
        let mean = s / n;
        let var = if n > 1.0 {
            ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok((mean, (var / n).sqrt()))
    }

    /// Value table with a per-cell standard error estimated from the spread
    /// of tables built on `batches` disjoint sub-samples.
    pub fn table_with_stderr(&self, horizon: Horizon, batches: usize) -> Result<(ValueTable, Vec<Vec<f64>>)> {
        let table = compute_value_table(self, horizon)?;
        let n = self.sample.draws.len();
        if batches < 2 || n < batches {
            return Err(Error::config(format!("cannot split {n} draws into {batches} batches")));
        }
        let size = n / batches;
        let subtables = (0..batches)
            .map(|b| {
                let draws = self.sample.draws[b * size..(b + 1) * size].to_vec();
                let sub = ilp_global_model(EmpiricalGainSample {
                    draws,
                    ..self.sample.clone()
                })?;
                compute_value_table(&sub, horizon)
            })
            .collect::<Result<Vec<_>>>()?;
        let stderr = (1..=horizon.years)
            .map(|steps| {
                (1..=steps.min(horizon.k))
                    .map(|stops| {
                        let v: Vec<f64> = subtables.iter().map(|t| t.value(steps, stops).unwrap()).collect();
                        let m = v.iter().sum::<f64>() / batches as f64;
                        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
                        (var / batches as f64).sqrt()
                    })
                    .collect()
            })
            .collect();
        Ok((table, stderr))
    }
}

impl GainModel for IlpGlobal {
    fn mean_gain(&self) -> f64 {
        self.mean
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        if c2 == f64::NEG_INFINITY {
            SignRegime::Global.check(c1, c2)?;
            return Ok(c1 + self.mean);
        }
        Ok(self.expected_max_with_stderr(c1, c2)?.0)
    }
}
