//! Post-attachment-point policy: losses from the first one that pushes the
//! running sum above the attachment `A` onwards are covered.
//!
//! With `M* = min{j : S_j > A}` a year with `N = m` losses retains
//! `S_{min(m, M*-1)}` and transfers the rest. The first-passage index has
//! `P[M* = j] = P[S_{j-1} <= A < S_j]`, free of `m`.

use super::lda::{CompoundIg, LDAModel};
use super::{integrate_checked, MixedLaw};
use crate::engine::{GainModel, SignRegime};
use crate::error::{Error, Result};
use crate::kernels::{ig_pdf, ig_sf, ig_sum_params, QuadratureSpec};

fn check_attachment(a: f64) -> Result<()> {
    if !(a > 0.0) || a.is_nan() {
        return Err(Error::config(format!("PAP attachment must be positive, got {a}")));
    }
    Ok(())
}

/// `P[M* = m_star]`: the first loss is above `A`, or
/// `int_0^A P[X > A - a] f_{S_{m*-1}}(a) da` by quadrature.
pub fn mstar_pmf(m_star: usize, lda: &LDAModel, attachment: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_attachment(attachment)?;
    if m_star == 0 {
        return Err(Error::domain("mstar_pmf: index starts at 1"));
    }
    let x = lda.severity;
    if m_star == 1 {
        return ig_sf(attachment, x);
    }
    let prev = ig_sum_params(m_star - 1, x)?;
    let integrand = |a: f64| -> Result<f64> {
        if a <= 0.0 {
            return Ok(0.0);
        }
        Ok(ig_sf(attachment - a, x)? * ig_pdf(a, prev)?)
    };
    integrate_checked(integrand, 0.0, attachment, &[], quad).map(|v| v.clamp(0.0, 1.0))
}

/// `P[M* = j]` for `j = 1..=m_max`, computed once per `(lda, attachment)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MstarTable {
    pmf: Vec<f64>,
}

impl MstarTable {
    pub fn new(lda: &LDAModel, attachment: f64, quad: &QuadratureSpec) -> Result<Self> {
        let pmf = (1..=lda.m_max)
            .map(|j| mstar_pmf(j, lda, attachment, quad))
            .collect::<Result<_>>()?;
        Ok(MstarTable { pmf })
    }

    pub fn get(&self, m_star: usize) -> f64 {
        m_star
            .checked_sub(1)
            .and_then(|i| self.pmf.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pmf
    }
}

/// Weights of the retained-loss law.
///
/// `d(m) = p_m P[S_m <= A]` is the no-crossing mass for `N = m`;
/// `d_pair(m*, m) = p_m P[M* = m*]` for `m* <= m` is the crossing mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PAPWeights {
    pub mstar_pmf: MstarTable,
    pmf: Vec<f64>,
    no_crossing: Vec<f64>,
}

impl PAPWeights {
    fn new(law: &CompoundIg, attachment: f64, mstar_pmf: MstarTable) -> Result<Self> {
        let no_crossing = (0..=law.m_max())
            .map(|m| law.cdf(m, attachment))
            .collect::<Result<_>>()?;
        Ok(PAPWeights {
            mstar_pmf,
            pmf: law.pmf.clone(),
            no_crossing,
        })
    }

    pub fn d(&self, m: usize) -> f64 {
        self.pmf[m] * self.no_crossing[m]
    }

    pub fn d_pair(&self, m_star: usize, m: usize) -> f64 {
        if m_star == 0 || m_star > m {
            return 0.0;
        }
        self.pmf[m] * self.mstar_pmf.get(m_star)
    }

    /// `P[S_m <= A]`.
    pub fn no_crossing(&self, m: usize) -> f64 {
        self.no_crossing[m]
    }
}

#[derive(Debug, Clone)]
struct PapCore {
    law: CompoundIg,
    attachment: f64,
    weights: PAPWeights,
    count_sf: Vec<f64>,
    quad: QuadratureSpec,
}

impl PapCore {
    fn new(lda: &LDAModel, attachment: f64) -> Result<Self> {
        check_attachment(attachment)?;
        let law = lda.compound()?;
        let quad = QuadratureSpec::default();
        let table = MstarTable::new(lda, attachment, &quad)?;
        let weights = PAPWeights::new(&law, attachment, table)?;
        let count_sf = law.count_sf();
        Ok(PapCore {
            law,
            attachment,
            weights,
            count_sf,
            quad,
        })
    }

    /// Density of `S_{j-1}` on the event of a crossing at `j >= 2`, summed
    /// with weights `P[N >= j]`, at `0 < s < A`.
    fn crossing_density(&self, s: f64) -> Result<f64> {
        if s <= 0.0 || s >= self.attachment {
            return Ok(0.0);
        }
        let over = ig_sf(self.attachment - s, self.law.severity)?;
        let mut acc = 0.0;
        for j in 2..=self.law.m_max() {
            acc += self.count_sf[j] * self.law.pdf(j - 1, s)?;
        }
        Ok(acc * over)
    }
}

/// Local objective, `W = -S_{min(N, M*-1)}`.
#[derive(Debug, Clone)]
pub struct PapLocal {
    core: PapCore,
    mean: f64,
}

pub fn pap_local_model(lda: &LDAModel, attachment: f64) -> Result<PapLocal> {
    let core = PapCore::new(lda, attachment)?;
    let mut model = PapLocal { core, mean: 0.0 };
    model.mean = -model.limited_retained(f64::INFINITY)?;
    Ok(model)
}

impl PapLocal {
    pub fn weights(&self) -> &PAPWeights {
        &self.core.weights
    }

    /// `E[min{Z_retained, d}]`.
    pub fn limited_retained(&self, d: f64) -> Result<f64> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        let c = &self.core;
        let a = c.attachment;
        let e = d.min(a);
        let mut no_cross = 0.0;
        for m in 1..=c.law.m_max() {
            let fa = c.law.cdf(m, a)?;
            let fe = c.law.cdf(m, e)?;
            let capped = if d.is_infinite() { 0.0 } else { d * (fa - fe) };
            no_cross += c.law.pmf[m] * (c.law.partial_moment(m, e)? + capped);
        }
        let crossing = integrate_checked(|s| Ok(s.min(d) * c.crossing_density(s)?), 0.0, a, &[d], &c.quad)?;
        Ok(no_cross + crossing)
    }

    /// Continuous-part density of the retained loss on `(0, A)`.
    pub fn density(&self, s: f64) -> Result<f64> {
        let c = &self.core;
        if s <= 0.0 || s > c.attachment {
            return Ok(0.0);
        }
        let mut acc = c.crossing_density(s)?;
        for m in 1..=c.law.m_max() {
            acc += c.law.pmf[m] * c.law.pdf(m, s)?;
        }
        Ok(acc)
    }
}

impl GainModel for PapLocal {
    fn mean_gain(&self) -> f64 {
        self.mean
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Local.check(c1, c2)?;
        if c2 == f64::NEG_INFINITY {
            return Ok(c1 + self.mean);
        }
        Ok(c1 - self.limited_retained((c1 - c2).max(0.0))?)
    }
}

impl MixedLaw for PapLocal {
    fn atoms(&self) -> Vec<(f64, f64)> {
        let c = &self.core;
        vec![(0.0, c.law.pmf[0] + c.count_sf[1] * c.weights.mstar_pmf.get(1))]
    }

    fn continuous_mass(&self) -> Result<f64> {
        integrate_checked(|s| self.density(s), 0.0, self.core.attachment, &[], &self.core.quad)
    }
}

/// Global objective, `W = X_{M*} + ... + X_N` when `M* <= N`, else 0.
#[derive(Debug, Clone)]
pub struct PapGlobal {
    core: PapCore,
    mean: f64,
    no_gain: f64,
    x_upper: f64,
}

pub fn pap_global_model(lda: &LDAModel, attachment: f64) -> Result<PapGlobal> {
    let core = PapCore::new(lda, attachment)?;
    let no_gain = (0..=core.law.m_max()).map(|m| core.weights.d(m)).sum();
    let mut model = PapGlobal {
        core,
        mean: 0.0,
        no_gain,
        x_upper: 0.0,
    };
    model.x_upper = model.severity_cutoff(0.0)?;
    model.mean = model.expected_max_unchecked(0.0, 0.0)?;
    Ok(model)
}

impl PapGlobal {
    pub fn weights(&self) -> &PAPWeights {
        &self.core.weights
    }

    /// `P[W = 0] = sum_m p_m P[S_m <= A]`.
    pub fn zero_atom(&self) -> f64 {
        self.no_gain
    }

    // Beyond this point the crossing loss `x` carries negligible mass and
    // first moment.
    fn severity_cutoff(&self, c2: f64) -> Result<f64> {
        let sev = self.core.law.severity;
        let scale = c2.abs() + self.core.law.m_max() as f64 * sev.mu + 1.0;
        let mut x = (self.core.attachment + sev.mu).max(1.0);
        loop {
            let sf = ig_sf(x, sev)?;
            let upper_moment = sev.mu - crate::kernels::ig_partial_moment(x, sev)?;
            if upper_moment + scale * sf < 1e-15 {
                return Ok(x);
            }
            x *= 1.5;
        }
    }

    /// `P[S_{j-1} <= A < S_{j-1} + x]` for `j = 1..=m_max` (index `j - 1`).
    fn kappa(&self, x: f64, out: &mut Vec<f64>) -> Result<()> {
        let c = &self.core;
        let a = c.attachment;
        out.clear();
        out.push(if x > a { 1.0 } else { 0.0 });
        for j in 2..=c.law.m_max() {
            let below = c.weights.no_crossing(j - 1);
            let rest = if x >= a { 0.0 } else { c.law.cdf(j - 1, a - x)? };
            out.push((below - rest).max(0.0));
        }
        Ok(())
    }

    /// `E[max{c1 + x + S_r, c2}]` for `r = 0..m_max`.
    fn tail_gain(&self, x: f64, c1: f64, c2: f64, out: &mut Vec<f64>) -> Result<()> {
        let law = &self.core.law;
        out.clear();
        out.push((c1 + x).max(c2));
        let e = c2 - c1 - x;
        for r in 1..law.m_max() {
            let mean_r = r as f64 * law.severity.mu;
            if e <= 0.0 {
                out.push(c1 + x + mean_r);
            } else {
                let f = law.cdf(r, e)?;
                out.push(c2 * f + (c1 + x) * (1.0 - f) + mean_r - law.partial_moment(r, e)?);
            }
        }
        Ok(())
    }

    fn expected_max_unchecked(&self, c1: f64, c2: f64) -> Result<f64> {
        let c = &self.core;
        let m_max = c.law.m_max();
        let pmf = &c.law.pmf;
        let integrand = |x: f64| -> Result<f64> {
            if x <= 0.0 {
                return Ok(0.0);
            }
            let fx = ig_pdf(x, c.law.severity)?;
            if fx == 0.0 {
                return Ok(0.0);
            }
            let mut kappa = Vec::with_capacity(m_max);
            let mut h = Vec::with_capacity(m_max);
            self.kappa(x, &mut kappa)?;
            self.tail_gain(x, c1, c2, &mut h)?;
            let mut acc = 0.0;
            for (j0, &kj) in kappa.iter().enumerate() {
                if kj == 0.0 {
                    continue;
                }
                let j = j0 + 1;
                let mut inner = 0.0;
                for (r, &hr) in h.iter().enumerate().take(m_max - j + 1) {
                    inner += pmf[j + r] * hr;
                }
                acc += kj * inner;
            }
            Ok(fx * acc)
        };
        let upper = if c2 == 0.0 {
            self.x_upper
        } else {
            self.severity_cutoff(c2)?.max(self.x_upper)
        };
        let kinks = [c.attachment, c2 - c1];
        let crossed = integrate_checked(integrand, 0.0, upper, &kinks, &c.quad)?;
        Ok(c2 * self.no_gain + crossed)
    }
}

impl GainModel for PapGlobal {
    fn mean_gain(&self) -> f64 {
        self.mean
    }

    fn expected_max(&self, c1: f64, c2: f64) -> Result<f64> {
        SignRegime::Global.check(c1, c2)?;
        if c2 == f64::NEG_INFINITY {
            return Ok(c1 + self.mean);
        }
        self.expected_max_unchecked(c1.max(0.0), c2.max(c1).max(0.0))
    }
}

impl MixedLaw for PapGlobal {
    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.no_gain)]
    }

    /// `int f_X(x) sum_j P[N >= j] kappa_j(x) dx`.
    fn continuous_mass(&self) -> Result<f64> {
        let c = &self.core;
        let integrand = |x: f64| -> Result<f64> {
            if x <= 0.0 {
                return Ok(0.0);
            }
            let mut kappa = Vec::new();
            self.kappa(x, &mut kappa)?;
            let s: f64 = kappa.iter().enumerate().map(|(j0, k)| k * c.count_sf[j0 + 1]).sum();
            Ok(ig_pdf(x, c.law.severity)? * s)
        };
        integrate_checked(integrand, 0.0, self.x_upper, &[c.attachment], &c.quad)
    }
}
