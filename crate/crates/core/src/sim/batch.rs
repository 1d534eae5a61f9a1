//! Scenario paths of annual losses with the policy applied year by year.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::sampling::{sample_count, sample_ig, stream};
use crate::policy::{ILPAuxModel, LDAModel, Objective, PolicySpec};

/// `M` paths of `T` years, stored row-major (path, year).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBatch {
    pub years: usize,
    pub paths: usize,
    pub seed: u64,
    pub objective: Objective,
    /// Annual loss before insurance.
    pub z: Vec<f64>,
    /// Annual loss the holder keeps when a claim is made.
    pub z_tilde: Vec<f64>,
    /// Gain from claiming: `-z_tilde` (local) or `z - z_tilde` (global).
    pub w: Vec<f64>,
}

impl ScenarioBatch {
    pub fn path_z(&self, i: usize) -> &[f64] {
        &self.z[i * self.years..(i + 1) * self.years]
    }

    pub fn path_z_tilde(&self, i: usize) -> &[f64] {
        &self.z_tilde[i * self.years..(i + 1) * self.years]
    }

    pub fn path_w(&self, i: usize) -> &[f64] {
        &self.w[i * self.years..(i + 1) * self.years]
    }

    fn assemble(years: usize, paths: usize, seed: u64, objective: Objective, rows: Vec<Vec<(f64, f64)>>) -> Self {
        let mut z = Vec::with_capacity(years * paths);
        let mut z_tilde = Vec::with_capacity(years * paths);
        for row in rows {
            for (a, b) in row {
                z.push(a);
                z_tilde.push(b);
            }
        }
        let w = z
            .iter()
            .zip(&z_tilde)
            .map(|(&a, &b)| match objective {
                Objective::Local => -b,
                Objective::Global => a - b,
            })
            .collect();
        ScenarioBatch {
            years,
            paths,
            seed,
            objective,
            z,
            z_tilde,
            w,
        }
    }
}

fn check_dims(years: usize, paths: usize) -> Result<()> {
    if years == 0 || paths == 0 {
        return Err(Error::config(format!(
            "need at least one year and one path, got T={years}, M={paths}"
        )));
    }
    Ok(())
}

/// Path `i` draws from its own stream, so batches do not depend on thread count.
pub fn simulate_batch(
    lda: &LDAModel,
    policy: PolicySpec,
    years: usize,
    paths: usize,
    seed: u64,
) -> Result<ScenarioBatch> {
    lda.validate()?;
    check_dims(years, paths)?;
    let rows: Vec<Vec<(f64, f64)>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let mut losses = Vec::new();
            (0..years)
                .map(|_| {
                    let n = sample_count(lda.frequency, &mut rng);
                    losses.clear();
                    losses.extend((0..n).map(|_| sample_ig(lda.severity, &mut rng)));
                    (losses.iter().sum::<f64>(), policy.insured_loss(&losses))
                })
                .collect()
        })
        .collect();
    Ok(ScenarioBatch::assemble(years, paths, seed, policy.objective, rows))
}

/// Local-objective batch for the individual-loss policy, where the retained
/// process is modelled directly. The pre-insurance loss is not part of that
/// model, so `z` repeats `z_tilde`.
pub fn simulate_auxiliary_batch(aux: &ILPAuxModel, years: usize, paths: usize, seed: u64) -> Result<ScenarioBatch> {
    let lda = aux.as_lda()?;
    check_dims(years, paths)?;
    let rows: Vec<Vec<(f64, f64)>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            (0..years)
                .map(|_| {
                    let n = sample_count(lda.frequency, &mut rng);
                    let s: f64 = (0..n).map(|_| sample_ig(lda.severity, &mut rng)).sum();
                    (s, s)
                })
                .collect()
        })
        .collect();
    Ok(ScenarioBatch::assemble(years, paths, seed, Objective::Local, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicyKind;

    #[test]
    fn huge_cap_retains_nothing() {
        let lda = LDAModel::from_params(3.0, 2.0, 3.0).unwrap();
        let spec = PolicySpec::new(PolicyKind::Alp(1e12), Objective::Local).unwrap();
        let b = simulate_batch(&lda, spec, 5, 200, 1).unwrap();
        assert!(b.z_tilde.iter().all(|&x| x == 0.0));
        assert!(b.w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn global_gain_is_covered_part() {
        let lda = LDAModel::from_params(1.0, 1.0, 3.0).unwrap();
        let spec = PolicySpec::new(PolicyKind::Pap(3.0), Objective::Global).unwrap();
        let b = simulate_batch(&lda, spec, 4, 300, 2).unwrap();
        for i in 0..b.z.len() {
            assert!((b.z_tilde[i] + b.w[i] - b.z[i]).abs() <= 4.0 * f64::EPSILON * b.z[i]);
            assert!(b.z[i] >= b.z_tilde[i] && b.z_tilde[i] >= 0.0);
        }
    }

    #[test]
    fn rejects_empty() {
        let lda = LDAModel::from_params(1.0, 1.0, 3.0).unwrap();
        let spec = PolicySpec::new(PolicyKind::Pap(3.0), Objective::Global).unwrap();
        assert!(simulate_batch(&lda, spec, 0, 10, 0).is_err());
    }
}
