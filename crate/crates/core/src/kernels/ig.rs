//! Inverse Gaussian and Generalized Inverse Gaussian laws.
//!
//! The sum of `n` i.i.d. `IG(mu, lambda)` losses is `IG(n mu, n^2 lambda)`,
//! which is also `GIG(lambda/mu^2, n^2 lambda, -1/2)`. Moving one power of
//! `x` into the density flips the index to `+1/2`, so partial expectations of
//! IG sums are GIG distribution functions.

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, QuadratureSpec};
use super::special::{ln_bessel_k, ln_std_normal_sf, std_normal_cdf};
use crate::error::{Error, Result};

/// Inverse Gaussian parameters: mean `mu` and shape `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IGParams {
    pub mu: f64,
    pub lambda: f64,
}

impl IGParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite() && lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!(
                "IG parameters must be positive and finite (mu={mu}, lambda={lambda})"
            )));
        }
        Ok(IGParams { mu, lambda })
    }

    pub fn variance(&self) -> f64 {
        self.mu.powi(3) / self.lambda
    }

    /// GIG representation of the `n`-fold sum with index `p` (`-1/2` for the
    /// density itself, `+1/2` for its size-biased version).
    pub fn sum_as_gig(&self, n: usize, p: f64) -> GIGParams {
        let n = n as f64;
        GIGParams {
            alpha: self.lambda / (self.mu * self.mu),
            beta: n * n * self.lambda,
            p,
        }
    }
}

/// Generalized Inverse Gaussian parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GIGParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
}

impl GIGParams {
    pub fn new(alpha: f64, beta: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite() && p.is_finite()) {
            return Err(Error::domain(format!(
                "GIG parameters invalid (alpha={alpha}, beta={beta}, p={p})"
            )));
        }
        Ok(GIGParams { alpha, beta, p })
    }
}

fn check_x(x: f64, routine: &str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("{routine}: x must be nonnegative, got {x}")));
    }
    Ok(())
}

/// IG density at `x > 0`.
pub fn ig_pdf(x: f64, params: IGParams) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("ig_pdf: x must be positive, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let IGParams { mu, lambda } = params;
    let ln = 0.5 * (lambda / (2.0 * std::f64::consts::PI)).ln()
        - 1.5 * x.ln()
        - lambda * (x - mu).powi(2) / (2.0 * mu * mu * x);
    Ok(ln.exp())
}

// (sqrt(lambda/x)(x/mu - 1), sqrt(lambda/x)(x/mu + 1))
fn ig_args(x: f64, params: IGParams) -> (f64, f64) {
    let r = (params.lambda / x).sqrt();
    (r * (x / params.mu - 1.0), r * (x / params.mu + 1.0))
}

// e^{2 lambda/mu} Phi(-b), evaluated in logs.
fn ig_reflected_term(b: f64, params: IGParams) -> f64 {
    (2.0 * params.lambda / params.mu + ln_std_normal_sf(b)).exp()
}

/// IG distribution function, closed form in the standard normal CDF.
pub fn ig_cdf(x: f64, params: IGParams) -> Result<f64> {
    check_x(x, "ig_cdf")?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let (a, b) = ig_args(x, params);
    Ok((std_normal_cdf(a) + ig_reflected_term(b, params)).clamp(0.0, 1.0))
}

/// IG survival function `1 - F(x)`, computed without cancellation in the tail.
pub fn ig_sf(x: f64, params: IGParams) -> Result<f64> {
    check_x(x, "ig_sf")?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (a, b) = ig_args(x, params);
    Ok((std_normal_cdf(-a) - ig_reflected_term(b, params)).clamp(0.0, 1.0))
}

/// `E[X; X <= x]` for `X ~ IG(mu, lambda)` in closed form.
///
/// Equals `mu * F_GIG(x; lambda/mu^2, lambda, 1/2)`; used on hot paths where
/// the quadrature route of [`gig_cdf`] would be too slow.
pub fn ig_partial_moment(x: f64, params: IGParams) -> Result<f64> {
    check_x(x, "ig_partial_moment")?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(params.mu);
    }
    let (a, b) = ig_args(x, params);
    let v = params.mu * (std_normal_cdf(a) - ig_reflected_term(b, params));
    Ok(v.clamp(0.0, params.mu))
}

/// Law of the sum of `n` i.i.d. IG variables: `IG(n mu, n^2 lambda)`.
pub fn ig_sum_params(n: usize, params: IGParams) -> Result<IGParams> {
    if n == 0 {
        return Err(Error::domain("ig_sum_params: n must be at least 1"));
    }
    let nf = n as f64;
    IGParams::new(nf * params.mu, nf * nf * params.lambda)
}

/// `int_0^x u f_{S_n}(u) du = n mu F_GIG(x; lambda/mu^2, n^2 lambda, 1/2)`.
pub fn ig_partial_expectation(x: f64, n: usize, params: IGParams, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x, "ig_partial_expectation")?;
    if n == 0 {
        return Err(Error::domain("ig_partial_expectation: n must be at least 1"));
    }
    let gig = params.sum_as_gig(n, 0.5);
    Ok(n as f64 * params.mu * gig_cdf(x, gig, spec)?)
}

/// GIG density at `x > 0`.
pub fn gig_pdf(x: f64, params: GIGParams) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("gig_pdf: x must be positive, got {x}")));
    }
    let d = GigDistribution::new(params)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok((d.ln_norm + (params.p - 1.0) * x.ln() - 0.5 * (params.alpha * x + params.beta / x)).exp())
}

/// GIG distribution function by adaptive quadrature in `t = ln u`.
pub fn gig_cdf(x: f64, params: GIGParams, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x, "gig_cdf")?;
    GigDistribution::new(params)?.cdf(x, spec)
}

/// A GIG law with its normalising constant and effective support precomputed.
#[derive(Debug, Clone, Copy)]
pub struct GigDistribution {
    params: GIGParams,
    ln_norm: f64,
    mode: f64,
    lower: f64,
    upper: f64,
}

// Mass outside [lower, upper] in log-space is below e^{-50} relative to the peak.
const WINDOW_DROP: f64 = 50.0;

impl GigDistribution {
    pub fn new(params: GIGParams) -> Result<Self> {
        let GIGParams { alpha, beta, p } = GIGParams::new(params.alpha, params.beta, params.p)?;
        let ln_norm = 0.5 * p * (alpha / beta).ln() - std::f64::consts::LN_2 - ln_bessel_k(p, (alpha * beta).sqrt())?;
        let mode = ((p + (p * p + alpha * beta).sqrt()) / alpha).ln();
        let log_kernel = |t: f64| p * t - 0.5 * (alpha * t.exp() + beta * (-t).exp());
        let peak = log_kernel(mode);
        let mut step = 0.25;
        while peak - log_kernel(mode - step) < WINDOW_DROP {
            step *= 2.0;
        }
        let lower = mode - step;
        let mut step = 0.25;
        while peak - log_kernel(mode + step) < WINDOW_DROP {
            step *= 2.0;
        }
        let upper = mode + step;
        Ok(GigDistribution {
            params,
            ln_norm,
            mode,
            lower,
            upper,
        })
    }

    fn log_density_t(&self, t: f64) -> f64 {
        let GIGParams { alpha, beta, p } = self.params;
        self.ln_norm + p * t - 0.5 * (alpha * t.exp() + beta * (-t).exp())
    }

    pub fn cdf(&self, x: f64, spec: &QuadratureSpec) -> Result<f64> {
        check_x(x, "gig_cdf")?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let t = x.ln();
        if t <= self.lower {
            return Ok(0.0);
        }
        if t >= self.upper {
            return Ok(1.0);
        }
        let dens = |s: f64| self.log_density_t(s).exp();
        let v = if t <= self.mode {
            integrate(dens, self.lower, t, spec)?.value
        } else {
            1.0 - integrate(dens, t, self.upper, spec)?.value
        };
        Ok(v.clamp(0.0, 1.0))
    }
}
