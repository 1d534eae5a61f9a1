//! Four-moment Laguerre expansion around a Gamma kernel.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use super::laguerre::{gamma_kernel, gamma_kernel_cdf, laguerre, rising};
use super::moments::MomentSet;
use super::positivity::{scan_bracket, Positivity};
use crate::error::{Error, Result};

/// Records a move of `(mu3, mu4)` onto the positivity boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refit {
    pub u: f64,
    pub original_mu3: f64,
    pub original_mu4: f64,
    pub segment: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub a: f64,
    pub b: f64,
    pub a3: f64,
    pub a4: f64,
    pub astar: [f64; 5],
    pub positivity: Positivity,
    pub u_max: f64,
    pub moments: MomentSet,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refit: Option<Refit>,
}

/// `(A3, A4)` for shape `a` and scaled central moments `(mu3, mu4)`.
pub fn expansion_coefficients(a: f64, mu3: f64, mu4: f64) -> (f64, f64) {
    let a3 = (mu3 - 2.0 * a) / (6.0 * rising(a, 3));
    let a4 = (mu4 - 12.0 * mu3 - 3.0 * a * a + 18.0 * a) / (24.0 * rising(a, 4));
    (a3, a4)
}

/// Coefficients of the density written as `sum_k A*_k g(bz; a+k-1)`.
pub fn astar_vector(a: f64, b: f64, a3: f64, a4: f64) -> [f64; 5] {
    let t3 = rising(a, 3) * a3;
    let t4 = rising(a, 4) * a4;
    [
        b * (1.0 - t3 + t4),
        b * (3.0 * t3 - 4.0 * t4),
        b * (-3.0 * t3 + 6.0 * t4),
        b * (t3 - 4.0 * t4),
        b * t4,
    ]
}

/// Upper end of the positivity scan: 1.5 times the `1 - 1e-12` quantile of
/// `Gamma(a, 1)`.
pub fn default_u_max(a: f64) -> f64 {
    let tail = 1e-12;
    let mut hi = a + 10.0 * a.sqrt() + 10.0;
    while gamma_ur(a, hi) > tail {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(a, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    1.5 * hi
}

pub fn fit_expansion(moments: MomentSet) -> Result<ExpansionFit> {
    moments.validate()?;
    let (a, b) = (moments.shape(), moments.scale());
    let (a3, a4) = expansion_coefficients(a, moments.mu3, moments.mu4);
    let u_max = default_u_max(a);
    let positivity = scan_bracket(a, a3, a4, u_max)?;
    Ok(ExpansionFit {
        a,
        b,
        a3,
        a4,
        astar: astar_vector(a, b, a3, a4),
        positivity,
        u_max,
        moments,
        refit: None,
    })
}

impl ExpansionFit {
    /// `1 + A3 L3(u) + A4 L4(u)`.
    pub fn bracket(&self, u: f64) -> f64 {
        bracket(self.a, self.a3, self.a4, u)
    }

    pub fn mean(&self) -> f64 {
        self.moments.mean
    }

    pub fn is_positive(&self) -> bool {
        self.positivity == Positivity::Positive
    }
}

pub(crate) fn bracket(a: f64, a3: f64, a4: f64, u: f64) -> f64 {
    1.0 + a3 * laguerre(3, a, u).unwrap_or(f64::NAN) + a4 * laguerre(4, a, u).unwrap_or(f64::NAN)
}

/// Approximate density of `Z` at `z`.
pub fn approx_pdf(fit: &ExpansionFit, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let u = fit.b * z;
    fit.b * gamma_kernel(u, fit.a) * fit.bracket(u)
}

/// `E[min{c1 + Z, c2}]` under the expansion. `c2 = +inf` is allowed.
pub fn approx_expected_min(fit: &ExpansionFit, c1: f64, c2: f64) -> Result<f64> {
    if c1.is_nan() || c2.is_nan() || !c1.is_finite() {
        return Err(Error::domain(format!(
            "approx_expected_min: invalid arguments ({c1}, {c2})"
        )));
    }
    if c1 > c2 {
        return Err(Error::domain(format!(
            "approx_expected_min needs c1 <= c2, got ({c1}, {c2})"
        )));
    }
    let (a, b) = (fit.a, fit.b);
    let x = b * (c2 - c1);
    let mut total = 0.0;
    for (k, &w) in fit.astar.iter().enumerate() {
        let s = a + k as f64;
        // x g(x; s) = s g(x; s+1) turns the z-weighted part into a shifted cdf
        let head = s / (b * b) * gamma_kernel_cdf(x, s + 1.0) + c1 / b * gamma_kernel_cdf(x, s);
        let tail = if c2.is_infinite() {
            0.0
        } else {
            c2 / b * (1.0 - gamma_kernel_cdf(x, s))
        };
        total += w * (head + tail);
    }
    Ok(total)
}
