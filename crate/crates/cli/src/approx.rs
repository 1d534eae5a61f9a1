use multistop::kernels::sampling::{sample_count, sample_ig, stream};
use multistop::kernels::{FrequencyModel, IGParams};
use multistop::policy::config::{PolicyConfig, PolicyName};
use multistop::policy::{Objective, PolicyKind, PolicySpec};
use multistop::series::{
    constrained_refit, curve_grid, fit_expansion, positivity_boundary, ExpansionFit, MomentSet, Positivity,
};
use serde::{Deserialize, Serialize};

use crate::commands::{read_config, write_file, write_json};
use crate::error::{CliError, CliResult};
use crate::GlobalArgs;

pub const LN_POISSON_PRESET: &str = "ln-poisson";

/// Where the four moments come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentSource {
    /// Mean, variance and third/fourth central moments of the loss.
    Moments {
        mean: f64,
        variance: f64,
        m3: f64,
        m4: f64,
    },
    /// Mean and variance of the loss, third/fourth central moments of the
    /// scaled variable `b Z`.
    ScaledMoments {
        mean: f64,
        variance: f64,
        mu3: f64,
        mu4: f64,
    },
    CompoundPoissonLognormal {
        rate: f64,
        mu: f64,
        sigma: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// Sample moments of simulated annual losses from a compound Poisson
    /// inverse Gaussian model, optionally after a policy.
    Simulated {
        rate: f64,
        mu: f64,
        lambda: f64,
        #[serde(default)]
        policy: Option<PolicyConfig>,
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxConfig {
    pub source: MomentSource,
}

fn simulated_losses(
    rate: f64,
    mu: f64,
    lambda: f64,
    policy: Option<PolicyConfig>,
    samples: usize,
    seed: u64,
) -> CliResult<Vec<f64>> {
    let freq = FrequencyModel::new(rate)?;
    let sev = IGParams::new(mu, lambda)?;
    let spec = policy
        .map(|p| {
            let kind = match p.kind {
                PolicyName::Alp => PolicyKind::Alp(p.param),
                PolicyName::Pap => PolicyKind::Pap(p.param),
                PolicyName::Ilp => PolicyKind::Ilp(p.param),
            };
            PolicySpec::new(kind, Objective::Local)
        })
        .transpose()?;
    Ok((0..samples as u64)
        .map(|i| {
            let mut rng = stream(seed, i);
            let n = sample_count(freq, &mut rng);
            let xs: Vec<f64> = (0..n).map(|_| sample_ig(sev, &mut rng)).collect();
            match &spec {
                Some(s) => s.insured_loss(&xs),
                None => xs.iter().sum(),
            }
        })
        .collect())
}

impl MomentSource {
    pub fn moments(&self, seed: Option<u64>) -> CliResult<MomentSet> {
        Ok(match *self {
            MomentSource::Moments { mean, variance, m3, m4 } => MomentSet::from_loss_moments(mean, variance, m3, m4)?,
            MomentSource::ScaledMoments {
                mean,
                variance,
                mu3,
                mu4,
            } => MomentSet::new(mean, variance, mu3, mu4)?,
            MomentSource::CompoundPoissonLognormal { rate, mu, sigma } => {
                MomentSet::compound_poisson_lognormal(rate, mu, sigma)?
            }
            MomentSource::Gamma { shape, rate } => MomentSet::gamma(shape, rate)?,
            MomentSource::Simulated {
                rate,
                mu,
                lambda,
                policy,
                samples,
                seed: s,
            } => MomentSet::from_sample(&simulated_losses(rate, mu, lambda, policy, samples, seed.unwrap_or(s))?)?,
        })
    }
}

#[derive(Debug, Serialize)]
struct FitFile<'a> {
    source: &'a MomentSource,
    positivity: Positivity,
    fit: &'a ExpansionFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    constrained: Option<&'a ExpansionFit>,
}

fn approx_config(g: &GlobalArgs) -> CliResult<ApproxConfig> {
    match (&g.config, g.preset.as_deref()) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or --preset, not both".into())),
        (Some(path), None) => serde_json::from_str(&read_config(path)?).map_err(|e| {
            CliError::Config(format!(
                "{}: line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        }),
        (None, Some(LN_POISSON_PRESET)) => Ok(ApproxConfig {
            source: MomentSource::CompoundPoissonLognormal {
                rate: 2.0,
                mu: 1.0,
                sigma: 0.8,
            },
        }),
        (None, Some(other)) => Err(CliError::Config(format!(
            "unknown approximation preset `{other}` (expected {LN_POISSON_PRESET})"
        ))),
        (None, None) => Err(CliError::Config("approx needs --config PATH or --preset NAME".into())),
    }
}

pub fn run(g: &GlobalArgs, points: usize) -> CliResult<()> {
    if points < 2 {
        return Err(CliError::Config(format!(
            "need at least two boundary points, got {points}"
        )));
    }
    let cfg = approx_config(g)?;
    let moments = cfg.source.moments(g.seed)?;
    let fit = fit_expansion(moments)?;
    let constrained = if fit.is_positive() {
        None
    } else {
        Some(constrained_refit(&fit)?)
    };
    write_json(
        &g.out,
        "fit.json",
        &FitFile {
            source: &cfg.source,
            positivity: fit.positivity,
            fit: &fit,
            constrained: constrained.as_ref(),
        },
    )?;
    let curve = positivity_boundary(fit.a, &curve_grid(fit.u_max, points))?;
    write_file(&g.out, "boundary.csv", &curve.to_csv())?;

    println!("a = {:.6}, b = {:.6}", fit.a, fit.b);
    println!("A3 = {:.6e}, A4 = {:.6e}", fit.a3, fit.a4);
    println!(
        "scaled moments (mu3, mu4) = ({:.6}, {:.6})",
        fit.moments.mu3, fit.moments.mu4
    );
    match fit.positivity {
        Positivity::Positive => println!("verdict: positive on [0, {:.3}]", fit.u_max),
        Positivity::Violated { u } => println!("verdict: negative near u = {u:.4}"),
    }
    if let Some(c) = &constrained {
        println!(
            "constrained refit: (mu3, mu4) = ({:.6}, {:.6}), A3 = {:.6e}, A4 = {:.6e}",
            c.moments.mu3, c.moments.mu4, c.a3, c.a4
        );
    }
    println!("wrote fit.json and boundary.csv to {}", g.out.display());
    Ok(())
}
