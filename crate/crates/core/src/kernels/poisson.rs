//! Poisson claim counts and the truncation point for compound sums.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Upper-tail probability below which the claim-count sum is truncated.
pub const POISSON_TAIL: f64 = 1e-10;

/// Poisson claim-count law per unit period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModel {
    pub rate: f64,
}

impl FrequencyModel {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("Poisson rate must be positive, got {rate}")));
        }
        Ok(FrequencyModel { rate })
    }

    pub fn pmf(&self, m: usize) -> f64 {
        poisson_pmf(m, self.rate)
    }

    /// `P(N > m)`.
    pub fn sf(&self, m: usize) -> f64 {
        gamma_lr(m as f64 + 1.0, self.rate)
    }

    /// Truncation index: the smallest `m` with `P(N > m) < 1e-10`, but never
    /// below `ceil(rate + 10 sqrt(rate))`.
    pub fn m_max(&self) -> usize {
        let floor = (self.rate + 10.0 * self.rate.sqrt()).ceil() as usize;
        let mut m = floor.max(1);
        while self.sf(m) >= POISSON_TAIL {
            m += 1;
        }
        m
    }

    /// `pmf(0..=m_max)`.
    pub fn pmf_table(&self) -> Vec<f64> {
        (0..=self.m_max()).map(|m| self.pmf(m)).collect()
    }
}

pub fn poisson_pmf(m: usize, rate: f64) -> f64 {
    if rate == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let m = m as f64;
    (m * rate.ln() - rate - ln_gamma(m + 1.0)).exp()
}
