//! Laguerre polynomials orthogonal under the `Gamma(a, 1)` kernel, in the
//! monic convention `L_n^{(a)} = n! (-1)^n Ltilde_n^{(a-1)}`.

use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

fn check(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::domain(format!(
            "Laguerre order {n} unsupported (max {MAX_ORDER})"
        )));
    }
    Ok(())
}

/// `L_n^{(a)}(u)` for `n <= 4`.
pub fn laguerre(n: usize, a: f64, u: f64) -> Result<f64> {
    check(n)?;
    Ok(match n {
        0 => 1.0,
        1 => u - a,
        2 => u * u - 2.0 * (a + 1.0) * u + (a + 1.0) * a,
        3 => {
            let (p1, p2) = (a + 1.0, a + 2.0);
            ((u - 3.0 * p2) * u + 3.0 * p2 * p1) * u - p2 * p1 * a
        }
        _ => {
            let (p1, p2, p3) = (a + 1.0, a + 2.0, a + 3.0);
            (((u - 4.0 * p3) * u + 6.0 * p3 * p2) * u - 4.0 * p3 * p2 * p1) * u + p3 * p2 * p1 * a
        }
    })
}

/// `d/du L_n^{(a)}(u)`.
pub fn laguerre_derivative(n: usize, a: f64, u: f64) -> Result<f64> {
    check(n)?;
    Ok(match n {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 * u - 2.0 * (a + 1.0),
        3 => 3.0 * u * u - 6.0 * (a + 2.0) * u + 3.0 * (a + 2.0) * (a + 1.0),
        _ => {
            let (p1, p2, p3) = (a + 1.0, a + 2.0, a + 3.0);
            4.0 * u.powi(3) - 12.0 * p3 * u * u + 12.0 * p3 * p2 * u - 4.0 * p3 * p2 * p1
        }
    })
}

/// `n! Gamma(a+n) / Gamma(a)`, the squared norm of `L_n^{(a)}`.
pub fn squared_norm(n: usize, a: f64) -> f64 {
    (1..=n).map(|j| j as f64 * (a + j as f64 - 1.0)).product()
}

/// `Gamma(a+j)/Gamma(a) = a (a+1) ... (a+j-1)`.
pub(crate) fn rising(a: f64, j: usize) -> f64 {
    (0..j).map(|i| a + i as f64).product()
}

/// Gamma(a, 1) kernel density.
pub fn gamma_kernel(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    ((a - 1.0) * u.ln() - u - ln_gamma(a)).exp()
}

/// Gamma(a, 1) distribution function.
pub fn gamma_kernel_cdf(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u.is_infinite() {
        1.0
    } else {
        gamma_lr(a, u)
    }
}
