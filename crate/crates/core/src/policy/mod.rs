//! Gain models for the three insurance policies under both objectives.

pub mod alp;
pub mod config;
pub mod ilp;
pub mod lda;
pub mod pap;

use std::cell::RefCell;

use crate::error::Result;
use crate::kernels::{integrate_pieces, QuadratureSpec};

pub use alp::{alp_global_model, alp_local_model, ALPWeights, AlpGlobal, AlpLocal};
pub use config::{build_gain_model, ModelConfig};
pub use ilp::{ilp_global_model, ilp_global_sample, ilp_local_model, EmpiricalGainSample, IlpGlobal, IlpLocal};
pub use lda::{ILPAuxModel, LDAModel, Objective, PolicyKind, PolicySpec};
pub use pap::{mstar_pmf, pap_global_model, pap_local_model, MstarTable, PAPWeights, PapGlobal, PapLocal};

/// A law made of point masses plus an absolutely continuous part.
pub trait MixedLaw {
    /// `(location, mass)` of each atom.
    fn atoms(&self) -> Vec<(f64, f64)>;

    /// Integral of the continuous part, by quadrature.
    fn continuous_mass(&self) -> Result<f64>;

    fn total_mass(&self) -> Result<f64> {
        Ok(self.atoms().iter().map(|a| a.1).sum::<f64>() + self.continuous_mass()?)
    }
}

/// Quadrature of a fallible integrand over `[lo, hi]`, split at the interior
/// `kinks`. The first integrand error aborts the result.
pub(crate) fn integrate_checked<F>(f: F, lo: f64, hi: f64, kinks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if hi <= lo {
        return Ok(0.0);
    }
    let mut breaks: Vec<f64> = std::iter::once(lo)
        .chain(kinks.iter().copied().filter(|&x| x > lo && x < hi))
        .chain(std::iter::once(hi))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let failure = RefCell::new(None);
    let out = integrate_pieces(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &breaks,
        spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out?.value)
}
