//! Reference gain model: `W = -Z` with `Z ~ LogNormal(mu, sigma^2)`.

use super::gain::{GainModel, SignRegime};
use crate::error::{Error, Result};
use crate::kernels::std_normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalLocal {
    mu: f64,
    sigma: f64,
    mean_loss: f64,
}

pub fn lognormal_local_model(mu: f64, sigma: f64) -> Result<LognormalLocal> {
    LognormalLocal::new(mu, sigma)
}

impl LognormalLocal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!(
                "lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(LognormalLocal {
            mu,
            sigma,
            mean_loss: (mu + 0.5 * sigma * sigma).exp(),
        })
    }

    /// `E[min{Z, d}]` for `d >= 0`.
    pub fn limited_mean(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        if d.is_infinite() {
            return self.mean_loss;
        }
        let (mu, s) = (self.mu, self.sigma);
        let ld = d.ln();
        self.mean_loss * std_normal_cdf((ld - mu - s * s) / s) + d * std_normal_cdf(-(ld - mu) / s)
    }
}

impl GainModel for LognormalLocal {
    fn mean_gain(&self) -> f64 {
        -self.mean_loss
    }

    /// `E[max{c1 - Z, c2}] = c1 - E[min{Z, c1 - c2}]`.
    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Local.check(c1, c2)?;
        Ok(c1 - self.limited_mean((c1 - c2).max(0.0)))
    }
}
