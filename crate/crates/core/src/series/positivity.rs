//! Where the expansion stays a density: the bracket `1 + A3 L3 + A4 L4`
//! must be nonnegative on the kernel support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{astar_vector, bracket, expansion_coefficients, ExpansionFit, Refit};
use super::laguerre::{laguerre, laguerre_derivative, rising};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Positivity {
    Positive,
    Violated { u: f64 },
}

const SCAN_POINTS: usize = 4000;
const CURVE_POINTS: usize = 600;

fn rounding_floor(a: f64, a3: f64, a4: f64, u: f64) -> f64 {
    let t3 = (a3 * laguerre(3, a, u).unwrap_or(0.0)).abs();
    let t4 = (a4 * laguerre(4, a, u).unwrap_or(0.0)).abs();
    1e-12 * (1.0 + t3 + t4)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Dense grid on `[0, u_max]` followed by golden-section refinement of every
/// grid-local minimum.
pub fn scan_bracket(a: f64, a3: f64, a4: f64, u_max: f64) -> Result<Positivity> {
    if !(a > 0.0 && u_max > 0.0 && u_max.is_finite()) || !a3.is_finite() || !a4.is_finite() {
        return Err(Error::domain(format!(
            "positivity scan needs a > 0, finite coefficients and finite u_max > 0 (a={a}, u_max={u_max})"
        )));
    }
    let h = u_max / SCAN_POINTS as f64;
    let f = |u: f64| bracket(a, a3, a4, u);
    let vals: Vec<f64> = (0..=SCAN_POINTS).into_par_iter().map(|i| f(i as f64 * h)).collect();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=SCAN_POINTS {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == SCAN_POINTS { f64::INFINITY } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right {
            let lo = (i as f64 - 1.0).max(0.0) * h;
            let hi = ((i + 1) as f64 * h).min(u_max);
            let (u, v) = golden_min(f, lo, hi);
            let (u, v) = if vals[i] < v { (i as f64 * h, vals[i]) } else { (u, v) };
            if v < best.1 {
                best = (u, v);
            }
        }
    }
    let (u, v) = best;
    if v < -rounding_floor(a, a3, a4, u) {
        return Ok(Positivity::Violated { u });
    }
    // A negative leading coefficient still turns the bracket negative past u_max.
    if a4 < 0.0 || (a4 == 0.0 && a3 < 0.0) {
        let mut u = u_max;
        while f(u) >= 0.0 {
            u *= 2.0;
        }
        return Ok(Positivity::Violated { u });
    }
    Ok(Positivity::Positive)
}

pub fn positivity_check(fit: &ExpansionFit, u_max: f64) -> Result<Positivity> {
    scan_bracket(fit.a, fit.a3, fit.a4, u_max)
}

/// Bracket coefficients with the kernel factored out:
/// `1 + A3 L3 + A4 L4 = mu3 B1 + mu4 B2 + B3`.
fn b_system(a: f64, u: f64) -> ([f64; 3], [f64; 3]) {
    let c3 = 1.0 / (6.0 * rising(a, 3));
    let c4 = 1.0 / (24.0 * rising(a, 4));
    let (l3, l4) = (laguerre(3, a, u).unwrap(), laguerre(4, a, u).unwrap());
    let (d3, d4) = (
        laguerre_derivative(3, a, u).unwrap(),
        laguerre_derivative(4, a, u).unwrap(),
    );
    let k = 18.0 * a - 3.0 * a * a;
    (
        [c3 * l3 - 12.0 * c4 * l4, c4 * l4, 1.0 - 2.0 * a * c3 * l3 + k * c4 * l4],
        [c3 * d3 - 12.0 * c4 * d4, c4 * d4, -2.0 * a * c3 * d3 + k * c4 * d4],
    )
}

/// `(mu3, mu4)` whose bracket has a double root at `u`, or `None` where the
/// system is singular.
pub fn curve_point(a: f64, u: f64) -> Option<(f64, f64)> {
    let ([b1, b2, b3], [d1, d2, d3]) = b_system(a, u);
    if b1 == 0.0 {
        return None;
    }
    let den = d2 - d1 * b2 / b1;
    if den == 0.0 {
        return None;
    }
    let mu4 = (d1 * b3 / b1 - d3) / den;
    let mu3 = -(mu4 * b2 + b3) / b1;
    (mu3.is_finite() && mu4.is_finite()).then_some((mu3, mu4))
}

/// Residuals of the two boundary equations at `(u, mu3, mu4)`, each divided
/// by the sum of the absolute values of its terms.
pub fn system_residuals(a: f64, u: f64, mu3: f64, mu4: f64) -> (f64, f64) {
    let (b, d) = b_system(a, u);
    let rel = |c: [f64; 3]| {
        let terms = [mu3 * c[0], mu4 * c[1], c[2]];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        terms.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE)
    };
    (rel(b), rel(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub u: f64,
    pub mu3: f64,
    pub mu4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityCurve {
    pub a: f64,
    pub samples: Vec<CurvePoint>,
    /// Grid points where the system was singular.
    pub singular: Vec<f64>,
}

impl PositivityCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,mu3,mu4\n");
        for p in &self.samples {
            out.push_str(&format!("{},{},{}\n", p.u, p.mu3, p.mu4));
        }
        out
    }
}

pub fn positivity_boundary(a: f64, u_grid: &[f64]) -> Result<PositivityCurve> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("shape must be positive, got {a}")));
    }
    if let Some(u) = u_grid.iter().find(|u| !(**u > 0.0 && u.is_finite())) {
        return Err(Error::domain(format!("curve grid values must be positive, got {u}")));
    }
    let points: Vec<(f64, Option<(f64, f64)>)> = u_grid.par_iter().map(|&u| (u, curve_point(a, u))).collect();
    let mut samples = Vec::new();
    let mut singular = Vec::new();
    for (u, p) in points {
        match p {
            Some((mu3, mu4)) => samples.push(CurvePoint { u, mu3, mu4 }),
            None => singular.push(u),
        }
    }
    Ok(PositivityCurve { a, samples, singular })
}

/// Log-spaced grid on `[u_max * 1e-6, u_max]`.
pub fn curve_grid(u_max: f64, n: usize) -> Vec<f64> {
    let lo = (u_max * 1e-6).ln();
    let hi = u_max.ln();
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

fn admissible(a: f64, u: f64, u_max: f64) -> bool {
    match curve_point(a, u) {
        Some((mu3, mu4)) => {
            let (a3, a4) = expansion_coefficients(a, mu3, mu4);
            matches!(scan_bracket(a, a3, a4, u_max), Ok(Positivity::Positive))
        }
        None => false,
    }
}

/// Maximal `u` intervals on which the curve point lies on the boundary of the
/// positivity region. Interior edges are located by bisection.
pub fn admissible_segments(a: f64, u_max: f64) -> Vec<(f64, f64)> {
    let grid = curve_grid(u_max, CURVE_POINTS);
    let flags: Vec<bool> = grid.par_iter().map(|&u| admissible(a, u, u_max)).collect();
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..50 {
            let mid = 0.5 * (inside + outside);
            if admissible(a, mid, u_max) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let mut segments = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..grid.len() {
        if flags[i] && start.is_none() {
            start = Some(if i == 0 { grid[0] } else { edge(grid[i], grid[i - 1]) });
        }
        if !flags[i] {
            if let Some(s) = start.take() {
                segments.push((s, edge(grid[i - 1], grid[i])));
            }
        }
    }
    if let Some(s) = start {
        segments.push((s, grid[grid.len() - 1]));
    }
    // Near u_max the curve barely moves and rounding can split one segment
    // into pieces whose ends coincide in moment space.
    let (s3, s4) = (2.0 * a, 3.0 * a * a + 6.0 * a);
    let close = |u: f64, v: f64| match (curve_point(a, u), curve_point(a, v)) {
        (Some(p), Some(q)) => ((p.0 - q.0) / s3).hypot((p.1 - q.1) / s4) < 1e-3,
        _ => false,
    };
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(segments.len());
    for seg in segments {
        match merged.last_mut() {
            Some(last) if close(last.1, seg.0) => last.1 = seg.1,
            _ => merged.push(seg),
        }
    }
    merged
}

/// Moves `(mu3, mu4)` to the nearest admissible curve point, distances scaled
/// by the Gamma values `(2a, 3a^2 + 6a)`. Fits that are already positive come
/// back unchanged.
pub fn constrained_refit(fit: &ExpansionFit) -> Result<ExpansionFit> {
    if fit.is_positive() {
        return Ok(fit.clone());
    }
    let a = fit.a;
    let (t3, t4) = (fit.moments.mu3, fit.moments.mu4);
    let (s3, s4) = (2.0 * a, 3.0 * a * a + 6.0 * a);
    let dist = |u: f64| match curve_point(a, u) {
        Some((m3, m4)) => ((m3 - t3) / s3).powi(2) + ((m4 - t4) / s4).powi(2),
        None => f64::INFINITY,
    };
    let segments = admissible_segments(a, fit.u_max);
    let mut best: Option<(f64, f64, (f64, f64))> = None;
    for &(lo, hi) in &segments {
        let n = 200;
        let grid: Vec<f64> = (0..=n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / n as f64).exp())
            .collect();
        let (i, _) = grid
            .iter()
            .enumerate()
            .map(|(i, &u)| (i, dist(u)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let (u, d) = golden_min(dist, grid[i.saturating_sub(1)], grid[(i + 1).min(n)]);
        if best.is_none_or(|b| d < b.1) {
            best = Some((u, d, (lo, hi)));
        }
    }
    let (u, _, segment) = best.ok_or_else(|| Error::Numerical {
        routine: "constrained_refit",
        detail: format!("no admissible boundary segment found for a = {a}"),
    })?;
    let (mu3, mu4) = curve_point(a, u).ok_or_else(|| Error::Numerical {
        routine: "constrained_refit",
        detail: format!("boundary curve singular at u = {u}"),
    })?;
    let (a3, a4) = expansion_coefficients(a, mu3, mu4);
    let positivity = scan_bracket(a, a3, a4, fit.u_max)?;
    let mut moments = fit.moments;
    moments.mu3 = mu3;
    moments.mu4 = mu4;
    Ok(ExpansionFit {
        a,
        b: fit.b,
        a3,
        a4,
        astar: astar_vector(a, fit.b, a3, a4),
        positivity,
        u_max: fit.u_max,
        moments,
        refit: Some(Refit {
            u,
            original_mu3: t3,
            original_mu4: t4,
            segment,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::fit::{default_u_max, fit_expansion};
    use crate::series::moments::MomentSet;

    #[test]
    fn gamma_is_positive() {
        let fit = fit_expansion(MomentSet::gamma(3.0, 1.0).unwrap()).unwrap();
        assert_eq!(positivity_check(&fit, fit.u_max).unwrap(), Positivity::Positive);
    }

    #[test]
    fn curve_points_are_double_roots() {
        let a = 2.0;
        let curve = positivity_boundary(a, &curve_grid(default_u_max(a), 50)).unwrap();
        assert!(curve.samples.len() > 40);
        for p in &curve.samples {
            let (r1, r2) = system_residuals(a, p.u, p.mu3, p.mu4);
            assert!(r1 < 1e-8 && r2 < 1e-8, "u={}: {r1} {r2}", p.u);
            let (a3, a4) = expansion_coefficients(a, p.mu3, p.mu4);
            let v = bracket(a, a3, a4, p.u);
            let s = a3 * laguerre_derivative(3, a, p.u).unwrap() + a4 * laguerre_derivative(4, a, p.u).unwrap();
            assert!(v.abs() < 1e-6 && s.abs() < 1e-6, "u={}: {v} {s}", p.u);
        }
    }

    #[test]
    fn far_below_curve_is_violated() {
        let a = 2.0;
        let (mu3, mu4) = curve_point(a, 3.0).unwrap();
        let (a3, a4) = expansion_coefficients(a, mu3, 0.2 * mu4);
        assert!(matches!(
            scan_bracket(a, a3, a4, default_u_max(a)).unwrap(),
            Positivity::Violated { .. }
        ));
    }

    #[test]
    fn refit_lands_on_admissible_boundary() {
        let a = 2.0;
        let b = 0.5;
        let m = MomentSet::new(a / b, a / (b * b), 9.0, 20.0).unwrap();
        let fit = fit_expansion(m).unwrap();
        assert!(!fit.is_positive());
        let re = constrained_refit(&fit).unwrap();
        assert!(re.is_positive(), "{:?}", re.positivity);
        let info = re.refit.unwrap();
        assert!(info.segment.0 <= info.u && info.u <= info.segment.1);
        assert!(re.bracket(info.u).abs() < 1e-6);
        // nudging towards the target leaves the region
        let (d3, d4) = (info.original_mu3 - re.moments.mu3, info.original_mu4 - re.moments.mu4);
        let (a3, a4) = expansion_coefficients(a, re.moments.mu3 + 0.05 * d3, re.moments.mu4 + 0.05 * d4);
        assert!(matches!(
            scan_bracket(a, a3, a4, re.u_max).unwrap(),
            Positivity::Violated { .. }
        ));
    }

    #[test]
    fn csv_header() {
        let c = positivity_boundary(1.5, &[1.0, 2.0]).unwrap();
        assert!(c.to_csv().starts_with("u,mu3,mu4\n"));
        assert!(positivity_boundary(1.5, &[0.0]).is_err());
    }
}
