use std::fs;
use std::path::{Path, PathBuf};

use multistop::engine::{compute_value_table, Horizon, ValueTable};
use multistop::policy::{build_gain_model, ModelConfig, Objective};
use multistop::sim::{run_experiment, ExperimentPreset, ExperimentReport, PresetName};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{GlobalArgs, HorizonArgs};

pub const LOGNORMAL_PRESET: &str = "lognormal";

pub fn read_config(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    write_file(dir, name, &(text + "\n"))
}

/// Model configuration from `--config` or `--preset lognormal`, with the
/// command-line overrides applied.
pub fn model_config(g: &GlobalArgs, h: &HorizonArgs) -> CliResult<ModelConfig> {
    let mut cfg = match (&g.config, g.preset.as_deref()) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --config or --preset, not both".into())),
        (Some(path), None) => ModelConfig::from_json(&read_config(path)?)?,
        (None, Some(LOGNORMAL_PRESET)) => {
            ModelConfig::from_json(r#"{"reference":{"kind":"lognormal","mu":0,"sigma":1},"horizon":{"T":10,"k":9}}"#)?
        }
        (None, Some(other)) => {
            return Err(CliError::Config(format!(
                "unknown model preset `{other}` (expected {LOGNORMAL_PRESET})"
            )))
        }
        (None, None) => return Err(CliError::Config("a model needs --config PATH or --preset NAME".into())),
    };
    if let Some(seed) = g.seed {
        cfg.mc.seed = seed;
    }
    if h.years.is_some() || h.k.is_some() {
        let base = cfg.horizon;
        let years = h.years.or(base.map(|b| b.years));
        let k = h.k.or(base.map(|b| b.k));
        match (years, k) {
            (Some(years), Some(k)) => cfg.horizon = Some(Horizon::new(years, k)?),
            _ => {
                return Err(CliError::Config(
                    "both --years and --k are needed without a configured horizon".into(),
                ))
            }
        }
    }
    Ok(cfg)
}

pub fn build_table(cfg: &ModelConfig) -> CliResult<ValueTable> {
    let horizon = cfg.horizon()?;
    let model = build_gain_model(cfg)?;
    Ok(compute_value_table(model.as_ref(), horizon)?)
}

pub fn value_table(g: &GlobalArgs, h: &HorizonArgs) -> CliResult<()> {
    let cfg = model_config(g, h)?;
    let table = build_table(&cfg)?;
    let t = write_file(&g.out, "value_table.csv", &table.to_csv())?;
    let b = write_file(&g.out, "thresholds.csv", &table.thresholds().to_csv())?;
    let hz = table.horizon();
    println!("v^{{{},{}}} = {:.6}", hz.years, hz.k, table.game_value());
    println!("wrote {} and {}", t.display(), b.display());
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    optimal_beats_all: bool,
    #[serde(flatten)]
    report: &'a ExperimentReport,
}

fn experiment_preset(g: &GlobalArgs) -> CliResult<ExperimentPreset> {
    match (&g.config, g.preset.as_deref()) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or --preset, not both".into())),
        (Some(path), None) => Ok(ExperimentPreset::from_json(&read_config(path)?)?),
        (None, Some(name)) => Ok(ExperimentPreset::named(name.parse::<PresetName>()?)),
        (None, None) => Err(CliError::Config(
            "experiment needs --preset (alp-study, pap-study, ilp-study) or --config PATH".into(),
        )),
    }
}

pub fn experiment(g: &GlobalArgs, paths: Option<usize>) -> CliResult<()> {
    let mut preset = experiment_preset(g)?;
    if let Some(seed) = g.seed {
        preset.seed = seed;
    }
    if let Some(paths) = paths {
        preset.paths = paths;
    }
    preset.validate()?;
    let report = run_experiment(&preset)?;
    write_json(
        &g.out,
        "report.json",
        &ReportFile {
            optimal_beats_all: report.optimal_beats_all(),
            report: &report,
        },
    )?;
    write_file(&g.out, "hist.csv", &report.hist_csv())?;
    write_file(&g.out, "triples.csv", &report.triples_csv())?;

    println!(
        "preset {} with {} paths, seed {}",
        preset.name, preset.paths, preset.seed
    );
    if let Some(e) = &report.exceedance {
        println!("P[Z > {}] = {:.4} +- {:.4}", e.cap, e.probability, e.stderr);
    }
    for study in &report.studies {
        let label = match study.objective {
            Objective::Local => "local",
            Objective::Global => "global",
        };
        println!("{label} objective, v = {:.4}", study.value_table.game_value());
        for o in &study.rules.outcomes {
            let z = o
                .versus_optimal
                .map(|c| format!("  z vs optimal {:.2}", c.z))
                .unwrap_or_default();
            println!("  {:<22} {:>10.4} +- {:.4}{z}", o.name, o.mean, o.stderr);
        }
    }
    println!("optimal beats all other rules: {}", report.optimal_beats_all());
    println!("wrote report.json, hist.csv and triples.csv to {}", g.out.display());
    Ok(())
}
