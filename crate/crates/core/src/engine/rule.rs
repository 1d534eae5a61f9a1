//! Online claim decisions driven by the threshold table.

use serde::{Deserialize, Serialize};

use super::table::{Thresholds, ValueTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Claim,
    Wait,
}

/// Position inside a running game: calendar year `1..=T` and rights used so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingState<'a> {
    pub year: usize,
    pub rights_used: usize,
    pub thresholds: &'a Thresholds,
}

impl<'a> StoppingState<'a> {
    pub fn start(thresholds: &'a Thresholds) -> Self {
        StoppingState {
            year: 1,
            rights_used: 0,
            thresholds,
        }
    }

    /// Threshold the current gain is compared with.
    pub fn threshold(&self) -> Result<f64> {
        let h = self.thresholds.horizon();
        if self.year == 0 || self.year > h.years || self.rights_used >= h.k {
            return Err(Error::Logic(format!(
                "no decision pending in year {} with {} of {} rights used",
                self.year, self.rights_used, h.k
            )));
        }
        self.thresholds.get(self.year, self.rights_used + 1).ok_or_else(|| {
            Error::Logic(format!(
                "infeasible state: year {} with {} rights left of {}",
                self.year,
                h.k - self.rights_used,
                h.years
            ))
        })
    }

    /// Whether the remaining years equal the remaining rights.
    pub fn is_forced(&self) -> bool {
        matches!(self.threshold(), Ok(b) if b == f64::NEG_INFINITY)
    }

    pub fn is_finished(&self) -> bool {
        let h = self.thresholds.horizon();
        self.rights_used >= h.k || self.year > h.years
    }

    /// Moves to the next year after `decision`.
    pub fn advance(&mut self, decision: Decision) {
        if decision == Decision::Claim {
            self.rights_used += 1;
        }
        self.year += 1;
    }
}

/// Claim iff `w` is at least the current threshold; ties claim.
pub fn decide(state: &StoppingState<'_>, w: f64) -> Result<Decision> {
    let b = state.threshold()?;
    Ok(if w >= b { Decision::Claim } else { Decision::Wait })
}

/// Claim years (1-based, increasing) and the gain collected on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingResult {
    pub taus: Vec<usize>,
    pub realized_gain: f64,
}

/// Applies [`decide`] along a full path of `T` gains.
pub fn run_rule(gains: &[f64], table: &ValueTable) -> Result<StoppingResult> {
    run_with_thresholds(gains, &table.thresholds())
}

/// As [`run_rule`] with thresholds computed once by the caller.
pub fn run_with_thresholds(gains: &[f64], thresholds: &Thresholds) -> Result<StoppingResult> {
    let h = thresholds.horizon();
    if gains.len() != h.years {
        return Err(Error::config(format!(
            "path has {} years, horizon has {}",
            gains.len(),
            h.years
        )));
    }
    let mut state = StoppingState::start(thresholds);
    let mut taus = Vec::with_capacity(h.k);
    let mut realized_gain = 0.0;
    while !state.is_finished() {
        let w = gains[state.year - 1];
        let d = decide(&state, w)?;
        if d == Decision::Claim {
            taus.push(state.year);
            realized_gain += w;
        }
        state.advance(d);
    }
    Ok(StoppingResult { taus, realized_gain })
}
