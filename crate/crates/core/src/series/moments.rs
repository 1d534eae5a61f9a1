//! First four moments of the insured loss, expressed for the scaled variable
//! `U = b * Z` with `b = E[Z] / Var[Z]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `mean` and `variance` describe `Z`; `mu3` and `mu4` are central moments
/// of `U = b Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub mu3: f64,
    pub mu4: f64,
}

impl MomentSet {
    pub fn new(mean: f64, variance: f64, mu3: f64, mu4: f64) -> Result<Self> {
        let m = MomentSet {
            mean,
            variance,
            mu3,
            mu4,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0 && self.mean.is_finite()) {
            return Err(Error::domain(format!(
                "mean must be positive and finite, got {}",
                self.mean
            )));
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::domain(format!(
                "variance must be positive and finite, got {}",
                self.variance
            )));
        }
        if !self.mu3.is_finite() || !(self.mu4 > 0.0 && self.mu4.is_finite()) {
            return Err(Error::domain(format!(
                "need finite mu3 and positive finite mu4, got ({}, {})",
                self.mu3, self.mu4
            )));
        }
        Ok(())
    }

    /// `b = E[Z] / Var[Z]`.
    pub fn scale(&self) -> f64 {
        self.mean / self.variance
    }

    /// `a = E[Z]^2 / Var[Z]`.
    pub fn shape(&self) -> f64 {
        self.mean * self.mean / self.variance
    }

    /// From the mean, variance and third/fourth central moments of `Z`.
    pub fn from_loss_moments(mean: f64, variance: f64, m3: f64, m4: f64) -> Result<Self> {
        let b = mean / variance;
        MomentSet::new(mean, variance, b.powi(3) * m3, b.powi(4) * m4)
    }

    /// Sample moments (population normalisation) of observed losses.
    pub fn from_sample(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::domain("need at least two observations"));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        MomentSet::from_loss_moments(mean, m2 / n, m3 / n, m4 / n)
    }

    /// Compound Poisson with the given raw severity moments `E[X^n]`, `n = 1..4`.
    pub fn compound_poisson(rate: f64, raw: [f64; 4]) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::domain(format!("frequency rate must be positive, got {rate}")));
        }
        // cumulants of a compound Poisson sum are rate * E[X^n]
        let k = raw.map(|r| rate * r);
        MomentSet::from_loss_moments(k[0], k[1], k[2], k[3] + 3.0 * k[1] * k[1])
    }

    /// Compound Poisson with `LogNormal(mu, sigma^2)` severities.
    pub fn compound_poisson_lognormal(rate: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::domain(format!("lognormal sigma must be positive, got {sigma}")));
        }
        let raw = [1.0, 2.0, 3.0, 4.0].map(|n: f64| (n * mu + 0.5 * n * n * sigma * sigma).exp());
        MomentSet::compound_poisson(rate, raw)
    }

    /// Exact moments of `Gamma(shape, rate)`.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) {
            return Err(Error::domain("gamma parameters must be positive"));
        }
        MomentSet::new(
            shape / rate,
            shape / (rate * rate),
            2.0 * shape,
            3.0 * shape * shape + 6.0 * shape,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_scaled_moments() {
        let m = MomentSet::gamma(2.5, 0.4).unwrap();
        assert!((m.shape() - 2.5).abs() < 1e-14);
        assert!((m.scale() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn lognormal_compound() {
        let m = MomentSet::compound_poisson_lognormal(2.0, 1.0, 0.8).unwrap();
        let k = |n: f64| 2.0 * (n + n * n * 0.32).exp();
        assert!((m.mean - k(1.0)).abs() < 1e-12);
        assert!((m.variance - k(2.0)).abs() < 1e-12);
        let b = k(1.0) / k(2.0);
        assert!((m.mu3 - b.powi(3) * k(3.0)).abs() < 1e-10);
        assert!((m.mu4 - b.powi(4) * (k(4.0) + 3.0 * k(2.0) * k(2.0))).abs() < 1e-9);
        assert!((m.shape() - 1.054).abs() < 1e-3);
    }

    #[test]
    fn sample_moments() {
        let xs = [1.0, 2.0, 3.0, 6.0];
        let m = MomentSet::from_sample(&xs).unwrap();
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.variance, 3.5);
        let b: f64 = 3.0 / 3.5;
        let m3 = (-8.0 - 1.0 + 0.0 + 27.0) / 4.0;
        assert!((m.mu3 - b.powi(3) * m3).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(MomentSet::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(MomentSet::new(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(MomentSet::from_sample(&[2.0, 2.0]).is_err());
    }
}
