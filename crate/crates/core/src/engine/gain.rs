//! The gain contract consumed by the backward recursion.

use crate::error::{Error, Result};

/// A per-year gain law `W`, seen only through the two expectations the
/// recursion needs.
pub trait GainModel: Send + Sync {
    /// `E[W]`.
    fn mean_gain(&self) -> f64;

    /// `E[max{c1 + W, c2}]`. `c2 = -inf` must return `c1 + E[W]`.
    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64>;
}

impl<G: GainModel + ?Sized> GainModel for Box<G> {
    fn mean_gain(&self) -> f64 {
        (**self).mean_gain()
    }
    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        (**self).expected_max(c1, c2)
    }
}

impl<G: GainModel + ?Sized> GainModel for &G {
    fn mean_gain(&self) -> f64 {
        (**self).mean_gain()
    }
    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        (**self).expected_max(c1, c2)
    }
}

/// Which side of zero the gain lives on; decides the admissible `(c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRegime {
    /// `W <= 0`; requires `c2 <= c1 <= 0`.
    Local,
    /// `W >= 0`; requires `0 <= c1 <= c2`.
    Global,
}

// Recursion values come from sums of rounded expectations, so exact sign
// checks would reject legitimate calls by a few ulps.
fn slack(x: f64) -> f64 {
    1e-9 * (1.0 + x.abs())
}

impl SignRegime {
    pub fn check(self, c1: f64, c2: f64) -> Result<()> {
        if c1.is_nan() || c2.is_nan() || c1.is_infinite() {
            return Err(Error::domain(format!("expected_max: invalid arguments ({c1}, {c2})")));
        }
        let ok = match self {
            SignRegime::Local => c1 <= slack(c1) && c2 <= c1 + slack(c1),
            SignRegime::Global => c1 >= -slack(c1) && (c2 >= c1 - slack(c1) || c2 == f64::NEG_INFINITY),
        };
        if ok {
            Ok(())
        } else {
            let need = match self {
                SignRegime::Local => "c2 <= c1 <= 0",
                SignRegime::Global => "0 <= c1 <= c2",
            };
            Err(Error::domain(format!(
                "expected_max({c1}, {c2}) outside the regime {need}"
            )))
        }
    }
}

/// Finite discrete gain law. Accepts any `(c1, c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGainModel {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteGainModel {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::domain("discrete gain law needs matching, nonempty support"));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::domain("discrete gain law has invalid atoms"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("discrete probabilities sum to {total}")));
        }
        Ok(DiscreteGainModel { values, probs })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }
}

impl GainModel for DiscreteGainModel {
    fn mean_gain(&self) -> f64 {
        self.atoms().map(|(w, p)| w * p).sum()
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        if c1.is_nan() || c2.is_nan() {
            return Err(Error::domain("expected_max: NaN argument"));
        }
        Ok(self.atoms().map(|(w, p)| p * (c1 + w).max(c2)).sum())
    }
}
