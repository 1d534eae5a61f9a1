use multistop::engine::{compute_value_table, run_rule, DiscreteGainModel, GainModel, Horizon, LognormalLocal};
use multistop::policy::{alp_local_model, LDAModel, Objective, PolicyKind, PolicySpec};
use multistop::series::{approx_pdf, fit_expansion, gamma_kernel, MomentSet};
use multistop::sim::simulate_batch;

use crate::error::{CliError, CliResult};
use crate::GlobalArgs;

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn lognormal_table() -> CliResult<Check> {
    let model = LognormalLocal::new(0.0, 1.0)?;
    let t = compute_value_table(&model, Horizon::new(10, 9)?)?;
    let cells = [(1, 1, -1.65), (2, 1, -1.02), (7, 4, -3.32), (10, 9, -11.78)];
    let worst = cells
        .iter()
        .map(|&(l, k, v)| (t.value(l, k).unwrap_or(f64::NAN) - v).abs())
        .fold(0.0, f64::max);
    Ok(Check {
        name: "lognormal value table",
        ok: worst <= 0.005 + 1e-9,
        detail: format!("largest deviation from 2-decimal values {worst:.4}"),
    })
}

fn worked_sequence() -> CliResult<Check> {
    let model = LognormalLocal::new(0.0, 1.0)?;
    let t = compute_value_table(&model, Horizon::new(7, 4)?)?;
    let r = run_rule(&[-0.57, -0.79, -4.75, -1.07, -1.14, -5.56, -1.59], &t)?;
    Ok(Check {
        name: "stopping rule replay",
        ok: r.taus == [1, 2, 4, 7] && (r.realized_gain + 4.02).abs() < 1e-9,
        detail: format!("claims {:?}, realized gain {:.4}", r.taus, r.realized_gain),
    })
}

fn tree_value(law: &[(f64, f64)], years: usize, rights: usize) -> f64 {
    if rights == 0 {
        return 0.0;
    }
    let claim = tree_value(law, years - 1, rights - 1);
    if rights == years {
        return law.iter().map(|(w, p)| p * w).sum::<f64>() + claim;
    }
    let wait = tree_value(law, years - 1, rights);
    law.iter().map(|(w, p)| p * (w + claim).max(wait)).sum()
}

fn exhaustive_tree() -> CliResult<Check> {
    let law = [(-2.0, 0.2), (0.5, 0.5), (3.0, 0.3)];
    let g = DiscreteGainModel::new(law.iter().map(|x| x.0).collect(), law.iter().map(|x| x.1).collect())?;
    let mut worst: f64 = 0.0;
    for years in 2..=6 {
        for k in 1..=3.min(years - 1) {
            let t = compute_value_table(&g, Horizon::new(years, k)?)?;
            let mut expected = 0.0;
            for code in 0..law.len().pow(years as u32) {
                let (mut c, mut prob, mut path) = (code, 1.0, Vec::with_capacity(years));
                for _ in 0..years {
                    let (w, p) = law[c % law.len()];
                    path.push(w);
                    prob *= p;
                    c /= law.len();
                }
                expected += prob * run_rule(&path, &t)?.realized_gain;
            }
            let tree = tree_value(&law, years, k);
            worst = worst.max((t.game_value() - tree).abs()).max((expected - tree).abs());
        }
    }
    Ok(Check {
        name: "discrete law against enumeration",
        ok: worst <= 1e-12,
        detail: format!("max deviation {worst:.2e}"),
    })
}

fn gamma_collapse() -> CliResult<Check> {
    let (shape, rate) = (2.5, 1.5);
    let fit = fit_expansion(MomentSet::gamma(shape, rate)?)?;
    let mut worst: f64 = fit.a3.abs().max(fit.a4.abs());
    for i in 1..=200 {
        let z = 0.05 * i as f64;
        worst = worst.max((approx_pdf(&fit, z) - rate * gamma_kernel(rate * z, shape)).abs());
    }
    Ok(Check {
        name: "series on a gamma law",
        ok: worst <= 1e-12,
        detail: format!("coefficients and density within {worst:.2e}"),
    })
}

fn closed_form_vs_simulation(seed: u64) -> CliResult<Check> {
    let lda = LDAModel::from_params(3.0, 2.0, 3.0)?;
    let model = alp_local_model(&lda, 10.0)?;
    let spec = PolicySpec::new(PolicyKind::Alp(10.0), Objective::Local)?;
    let batch = simulate_batch(&lda, spec, 1, 400_000, seed)?;
    let mut worst: f64 = 0.0;
    for (c1, c2) in [(0.0, -1.0), (-1.0, -3.0), (-0.5, -4.0)] {
        let vals: Vec<f64> = batch.w.iter().map(|w| (c1 + w).max(c2)).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        worst = worst.max((model.expected_max(c1, c2)? - mean).abs() / (var / n).sqrt());
    }
    Ok(Check {
        name: "closed form against simulation",
        ok: worst < 3.0,
        detail: format!("largest gap {worst:.2} standard errors (seed {seed})"),
    })
}

pub fn run(g: &GlobalArgs) -> CliResult<()> {
    let checks = [
        lognormal_table()?,
        worked_sequence()?,
        exhaustive_tree()?,
        gamma_collapse()?,
        closed_form_vs_simulation(g.seed.unwrap_or(1))?,
    ];
    for c in &checks {
        println!("{} {}: {}", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.ok).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}
