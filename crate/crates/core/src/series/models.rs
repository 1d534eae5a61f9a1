//! Local-objective gain models `W = -Z` for a Gamma loss and for its series
//! approximation.

use super::fit::{approx_expected_min, ExpansionFit};
use super::laguerre::gamma_kernel_cdf;
use crate::engine::{GainModel, SignRegime};
use crate::error::{Error, Result};

/// `Z ~ Gamma(shape, rate)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLocal {
    shape: f64,
    rate: f64,
}

impl GammaLocal {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::domain(format!(
                "gamma needs positive finite parameters, got ({shape}, {rate})"
            )));
        }
        Ok(GammaLocal { shape, rate })
    }

    /// `E[min{Z, d}]`.
    pub fn limited_mean(&self, d: f64) -> f64 {
        let (a, b) = (self.shape, self.rate);
        if d <= 0.0 {
            return 0.0;
        }
        if d.is_infinite() {
            return a / b;
        }
        a / b * gamma_kernel_cdf(b * d, a + 1.0) + d * (1.0 - gamma_kernel_cdf(b * d, a))
    }
}

impl GainModel for GammaLocal {
    fn mean_gain(&self) -> f64 {
        -self.shape / self.rate
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Local.check(c1, c2)?;
        Ok(c1 - self.limited_mean((c1 - c2).max(0.0)))
    }
}

/// Gain driven by a fitted expansion: `E[max{c1 - Z, c2}] = -E[min{-c1 + Z, -c2}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLocal {
    fit: ExpansionFit,
}

impl SeriesLocal {
    pub fn new(fit: ExpansionFit) -> Self {
        SeriesLocal { fit }
    }

    pub fn fit(&self) -> &ExpansionFit {
        &self.fit
    }
}

impl GainModel for SeriesLocal {
    fn mean_gain(&self) -> f64 {
        -self.fit.mean()
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Local.check(c1, c2)?;
        let (lo, hi) = (-c1, -c2);
        Ok(-approx_expected_min(&self.fit, lo, hi.max(lo))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compute_value_table, Horizon};
    use crate::series::{fit_expansion, MomentSet};

    #[test]
    fn series_table_matches_gamma_table() {
        let (shape, rate) = (2.2, 0.8);
        let exact = GammaLocal::new(shape, rate).unwrap();
        let approx = SeriesLocal::new(fit_expansion(MomentSet::gamma(shape, rate).unwrap()).unwrap());
        let h = Horizon::new(8, 3).unwrap();
        let t1 = compute_value_table(&exact, h).unwrap();
        let t2 = compute_value_table(&approx, h).unwrap();
        for steps in 1..=8 {
            for stops in 1..=3.min(steps) {
                let (x, y) = (t1.value(steps, stops).unwrap(), t2.value(steps, stops).unwrap());
                assert!((x - y).abs() < 1e-8, "({steps},{stops}) {x} {y}");
            }
        }
    }

    #[test]
    fn contract() {
        let g = GammaLocal::new(2.0, 1.0).unwrap();
        assert_eq!(g.expected_max(-1.0, f64::NEG_INFINITY).unwrap(), -3.0);
        assert_eq!(g.expected_max(-1.0, -1.0).unwrap(), -1.0);
        assert!(g.expected_max(1.0, 0.0).is_err());
        let s = SeriesLocal::new(fit_expansion(MomentSet::gamma(2.0, 1.0).unwrap()).unwrap());
        assert!((s.expected_max(-1.0, f64::NEG_INFINITY).unwrap() + 3.0).abs() < 1e-12);
    }
}
