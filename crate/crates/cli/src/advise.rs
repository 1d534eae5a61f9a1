use std::io::{BufRead, Write};

use multistop::engine::{decide, Decision, StoppingState};
use multistop::policy::Objective;

use crate::commands::{build_table, model_config};
use crate::error::{CliError, CliResult};
use crate::{GlobalArgs, HorizonArgs};

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(format!("terminal: {e}"))
}

fn fmt_threshold(b: f64) -> String {
    if b == f64::NEG_INFINITY {
        "-inf (forced)".into()
    } else {
        format!("{b:.4}")
    }
}

/// Reads an observation, re-prompting until a usable number arrives.
/// `None` means the input ended.
fn read_value<R: BufRead, W: Write>(input: &mut R, out: &mut W, prompt: &str, loss: bool) -> CliResult<Option<f64>> {
    let mut line = String::new();
    loop {
        write!(out, "{prompt}").map_err(io_err)?;
        out.flush().map_err(io_err)?;
        line.clear();
        if input.read_line(&mut line).map_err(io_err)? == 0 {
            return Ok(None);
        }
        let text = line.trim();
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() && !(loss && x < 0.0) => return Ok(Some(if loss { -x } else { x })),
            Ok(_) if loss => writeln!(out, "a loss must be a finite nonnegative number, got `{text}`"),
            _ => writeln!(out, "not a number: `{text}`, please enter the observed value"),
        }
        .map_err(io_err)?;
    }
}

pub fn run<R: BufRead, W: Write>(
    g: &GlobalArgs,
    h: &HorizonArgs,
    loss: bool,
    mut input: R,
    mut out: W,
) -> CliResult<()> {
    let cfg = model_config(g, h)?;
    if loss && cfg.objective() == Objective::Global {
        return Err(CliError::Config(
            "--loss converts a retained loss into a local-objective gain; the configured objective is global".into(),
        ));
    }
    let table = build_table(&cfg)?;
    let thresholds = table.thresholds();
    let hz = table.horizon();
    let what = if loss { "loss" } else { "gain" };
    writeln!(
        out,
        "T = {}, k = {}, value of the game {:.4}",
        hz.years,
        hz.k,
        table.game_value()
    )
    .map_err(io_err)?;

    let mut state = StoppingState::start(&thresholds);
    let mut taus = Vec::new();
    let mut realized = 0.0;
    while !state.is_finished() {
        let b = state.threshold()?;
        let left = hz.k - state.rights_used;
        let prompt = format!(
            "year {} ({} claim(s) left, threshold {}) {what}> ",
            state.year,
            left,
            fmt_threshold(b)
        );
        let Some(w) = read_value(&mut input, &mut out, &prompt, loss)? else {
            writeln!(out, "\ninput ended in year {}", state.year).map_err(io_err)?;
            return Ok(());
        };
        let d = decide(&state, w)?;
        let forced = if state.is_forced() { " (forced)" } else { "" };
        match d {
            Decision::Claim => {
                taus.push(state.year);
                realized += w;
                writeln!(out, "year {}: Claim{forced}", state.year)
            }
            Decision::Wait => writeln!(out, "year {}: Wait", state.year),
        }
        .map_err(io_err)?;
        state.advance(d);
    }
    let years: Vec<String> = taus.iter().map(|t| t.to_string()).collect();
    writeln!(
        out,
        "claimed in years {}; realized gain {realized:.4}",
        years.join(", ")
    )
    .map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn args(preset: &str) -> GlobalArgs {
        GlobalArgs {
            config: None,
            seed: None,
            out: PathBuf::from("."),
            preset: Some(preset.into()),
        }
    }

    fn session(input: &str, years: usize, k: usize, loss: bool) -> String {
        let h = HorizonArgs {
            years: Some(years),
            k: Some(k),
        };
        let mut out = Vec::new();
        run(&args("lognormal"), &h, loss, input.as_bytes(), &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn replays_a_known_sequence() {
        let out = session("-0.57\n-0.79\n-4.75\n-1.07\n-1.14\n-5.56\n-1.59\n", 7, 4, false);
        assert!(out.contains("threshold -1.53"), "{out}");
        assert!(
            out.contains("claimed in years 1, 2, 4, 7; realized gain -4.02"),
            "{out}"
        );
        assert!(out.contains("year 7: Claim (forced)"), "{out}");
    }

    #[test]
    fn reprompts_on_garbage() {
        let out = session("abc\n\n-0.57\n", 7, 4, false);
        assert_eq!(out.matches("not a number").count(), 2, "{out}");
        assert!(out.contains("year 1: Claim"));
        assert!(out.contains("input ended in year 2"));
    }

    #[test]
    fn losses_are_negated() {
        let out = session("0.57\n-1\n0.79\n4.75\n1.07\n1.14\n5.56\n1.59\n", 7, 4, true);
        assert!(out.contains("nonnegative"), "{out}");
        assert!(out.contains("realized gain -4.02"), "{out}");
    }

    #[test]
    fn forced_claims_when_rights_match_years() {
        let out = session("-9\n-9\n-9\n", 3, 2, false);
        assert!(out.contains("year 2: Claim (forced)"), "{out}");
        assert!(out.contains("year 3: Claim (forced)"), "{out}");
    }
}
