//! Backward recursion for the value of the game and the exercise thresholds.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gain::GainModel;
use crate::error::{Error, Result};

/// `T` years and `k` exercise rights, `1 <= k < T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    #[serde(rename = "T")]
    pub years: usize,
    pub k: usize,
}

impl Horizon {
    pub fn new(years: usize, k: usize) -> Result<Self> {
        let h = Horizon { years, k };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.years {
            return Err(Error::config(format!(
                "horizon needs 1 <= k < T, got T={}, k={}",
                self.years, self.k
            )));
        }
        Ok(())
    }
}

/// Triangular table `v^{L,l}` for `L = 1..=T` steps remaining and
/// `l = 1..=min(L, k)` rights remaining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    horizon: Horizon,
    rows: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// `v^{L,l}`; `v^{L,0} = 0`, `None` outside the triangle.
    pub fn value(&self, steps: usize, stops: usize) -> Option<f64> {
        if stops == 0 {
            return (steps <= self.horizon.years).then_some(0.0);
        }
        self.rows.get(steps.checked_sub(1)?)?.get(stops - 1).copied()
    }

    /// `v^{T,k}`, the value of the whole game.
    pub fn game_value(&self) -> f64 {
        self.rows[self.horizon.years - 1][self.horizon.k - 1]
    }

    /// Rows `L` and columns `l`, blank above the diagonal.
    pub fn to_csv(&self) -> String {
        let Horizon { years, k } = self.horizon;
        let mut out = String::from("L");
        for l in 1..=k {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{}", i + 1);
            for l in 0..k {
                match row.get(l) {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        debug_assert_eq!(self.rows.len(), years);
        out
    }

    pub fn thresholds(&self) -> Thresholds {
        thresholds(self)
    }
}

/// Fills the table by backward recursion:
/// `v^{1,1} = E[W]`, `v^{L,1} = E[max{W, v^{L-1,1}}]`,
/// `v^{L,l+1} = E[max{v^{L-1,l} + W, v^{L-1,l+1}}]`, `v^{l,l} = v^{l-1,l-1} + E[W]`.
pub fn compute_value_table<G: GainModel + ?Sized>(model: &G, horizon: Horizon) -> Result<ValueTable> {
    horizon.validate()?;
    let mean = model.mean_gain();
    if !mean.is_finite() {
        return Err(Error::Numerical {
            routine: "compute_value_table",
            detail: format!("mean gain is {mean}"),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(horizon.years);
    for steps in 1..=horizon.years {
        let width = steps.min(horizon.k);
        let mut row = Vec::with_capacity(width);
        for stops in 1..=width {
            let v = if stops == steps {
                let prev = if steps == 1 { 0.0 } else { rows[steps - 2][steps - 2] };
                prev + mean
            } else {
                let prev = &rows[steps - 2];
                let c1 = if stops == 1 { 0.0 } else { prev[stops - 2] };
                model.expected_max(c1, prev[stops - 1]).map_err(|e| Error::Cell {
                    steps,
                    stops,
                    source: Box::new(e),
                })?
            };
            if !v.is_finite() {
                return Err(Error::Cell {
                    steps,
                    stops,
                    source: Box::new(Error::Numerical {
                        routine: "compute_value_table",
                        detail: format!("non-finite value {v}"),
                    }),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(ValueTable { horizon, rows })
}

/// Exercise thresholds indexed by calendar year `m` and right `i`.
///
/// The `i`-th right is used in year `m` iff `W(m) >= b(T - m, i)` with
/// `b(L, i) = v^{L,k-i+1} - v^{L,k-i}`. When the remaining years equal the
/// remaining rights the threshold is `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    horizon: Horizon,
    // rows[m-1][i-1]; None where the state cannot occur
    rows: Vec<Vec<Option<f64>>>,
}

pub fn thresholds(table: &ValueTable) -> Thresholds {
    let Horizon { years, k } = table.horizon;
    let rows = (1..=years)
        .map(|m| {
            (1..=k)
                .map(|i| {
                    let remaining = k - i + 1;
                    let steps = years - m;
                    // years m..=T still available, rights i-1 already used (needs i-1 < m)
                    if i > m || steps + 1 < remaining {
                        None
                    } else if steps + 1 == remaining {
                        Some(f64::NEG_INFINITY)
                    } else {
                        let hi = table.value(steps, remaining).expect("inside triangle");
                        let lo = table.value(steps, remaining - 1).expect("inside triangle");
                        Some(hi - lo)
                    }
                })
                .collect()
        })
        .collect();
    Thresholds {
        horizon: table.horizon,
        rows,
    }
}

impl Thresholds {
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// Threshold for right `i` in year `m`, or `None` for unreachable states.
    pub fn get(&self, year: usize, right: usize) -> Option<f64> {
        self.rows
            .get(year.checked_sub(1)?)?
            .get(right.checked_sub(1)?)
            .copied()
            .flatten()
    }

    /// Rows are years, columns are rights; `-inf` marks forced exercise and
    /// blanks mark unreachable states.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year");
        for i in 1..=self.horizon.k {
            let _ = write!(out, ",{i}");
        }
        out.push('\n');
        for (m, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{}", m + 1);
            for cell in row {
                match cell {
                    Some(v) if v.is_infinite() => out.push_str(",-inf"),
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}
