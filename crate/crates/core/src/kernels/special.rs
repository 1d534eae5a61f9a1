//! Normal-distribution helpers and the modified Bessel function of the third kind.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

use super::quadrature::{integrate, QuadratureSpec};
use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Φ(-y)`, accurate far into the upper tail.
pub(crate) fn ln_std_normal_sf(y: f64) -> f64 {
    if y < 37.0 {
        (0.5 * erfc(y * FRAC_1_SQRT_2)).ln()
    } else {
        let r = 1.0 / (y * y);
        let series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
        -0.5 * y * y - (y * (2.0 * PI).sqrt()).ln() + series.ln()
    }
}

/// Returns `Some(n)` when `|p| = n + 1/2`.
fn half_integer_order(p: f64) -> Option<u32> {
    let twice = 2.0 * p.abs();
    let r = twice.round();
    if (twice - r).abs() < 1e-12 && r % 2.0 == 1.0 && r < 400.0 {
        Some(((r - 1.0) / 2.0) as u32)
    } else {
        None
    }
}

/// `e^z K_p(z)`.
fn bessel_k_scaled(p: f64, z: f64) -> Result<f64> {
    if !p.is_finite() || !z.is_finite() {
        return Err(Error::domain(format!("bessel_k: non-finite input (p={p}, z={z})")));
    }
    if z <= 0.0 {
        return Err(Error::domain(format!("bessel_k: z must be positive, got {z}")));
    }
    if let Some(n) = half_integer_order(p) {
        // K_{1/2} = K_{-1/2} = sqrt(pi / 2z) e^{-z}; K_{v+1} = K_{v-1} + (2v/z) K_v.
        let base = (PI / (2.0 * z)).sqrt();
        let (mut prev, mut cur) = (base, base);
        for j in 0..n {
            let nu = j as f64 + 0.5;
            let next = prev + 2.0 * nu / z * cur;
            prev = cur;
            cur = next;
        }
        return Ok(cur);
    }
    // K_p(z) = int_0^inf exp(-z cosh t) cosh(p t) dt, scaled by e^z.
    let q = p.abs();
    let log_integrand = |t: f64| -z * (t.cosh() - 1.0) + q * t;
    let mut upper = 1.0_f64;
    while log_integrand(upper) > -60.0 || upper < 2.0 {
        upper *= 1.5;
        if upper > 1e3 {
            break;
        }
    }
    let spec = QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
    };
    let r = integrate(|t| (-z * (t.cosh() - 1.0)).exp() * (q * t).cosh(), 0.0, upper, &spec)?;
    Ok(r.value)
}

/// Modified Bessel function of the third kind, `K_p(z)` for `z > 0`.
pub fn bessel_k(p: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(p, z)? * (-z).exp())
}

/// `ln K_p(z)`; stays finite where `K_p(z)` itself underflows.
pub fn ln_bessel_k(p: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(p, z)?.ln() - z)
}
