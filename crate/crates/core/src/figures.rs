//! Named parameter sets for the model's illustrative curves, and a small
//! column-oriented table used for all tabular output.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{bo_dictator_utility, dictator_utility, AgentParams, EconomyState};
use crate::solver::{linspace_step, sweep_other_trend, sweep_own_trend, SweepPoint, TrendLink};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    /// Missing values are `None`.
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map(|v| format!("{v}")).unwrap_or_default()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let line = |items: &[String]| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(out, "{}", line(&self.columns))?;
        for r in &cells {
            writeln!(out, "{}", line(r))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Utility over the kept share, with and without the trend terms.
    Fig2a,
    /// Optimal share as the dictator's own trend varies, recipient's fixed.
    Fig2b,
    /// Optimal share with both trends moving together.
    Fig3a,
    /// Optimal share as the recipient's trend varies.
    Fig3b,
    /// Utility over the kept share for three agent types.
    FigC1,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig2a, Preset::Fig2b, Preset::Fig3a, Preset::Fig3b, Preset::FigC1];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::FigC1 => "figC1",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownId {
                kind: "preset",
                value: s.to_owned(),
            })
    }
}

fn agent(a: f64, b: f64, eta: f64) -> AgentParams {
    AgentParams::new(a, b, eta).expect("preset parameters are valid")
}

fn econ(w_i: f64, w_j: f64, d_i: f64, d_j: f64, t: f64) -> EconomyState {
    EconomyState::new(w_i, w_j, d_i, d_j, t).expect("preset parameters are valid")
}

/// Rows `(x, s_star_model, s_star_bo)` for a solved sweep.
pub fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(["x", "s_star_model", "s_star_bo"]);
    t.rows = points
        .iter()
        .map(|p| vec![Some(p.x), Some(p.result.s_star), p.bo])
        .collect();
    t
}

pub fn preset_table(preset: Preset) -> Table {
    let share_grid = || linspace_step(0.0, 1.0, 0.01).expect("valid grid");
    match preset {
        Preset::Fig2a => {
            let a = agent(2.0, 0.5, 0.8);
            let e = econ(10.0, 5.0, -5.0, -5.0, 9.0);
            let mut t = Table::new(["s", "utility_model", "utility_bo"]);
            t.rows = share_grid()
                .into_iter()
                .map(|s| {
                    let s = s.min(1.0);
                    vec![
                        Some(s),
                        Some(dictator_utility(&a, &e, s).expect("s in [0, 1]").total),
                        Some(bo_dictator_utility(&a, &e, s).expect("s in [0, 1]")),
                    ]
                })
                .collect();
            t
        }
        Preset::Fig2b => {
            let xs = linspace_step(-10.0, 10.0, 0.1).expect("valid grid");
            sweep_table(&sweep_own_trend(
                &agent(4.0, 1.0, 0.8),
                &econ(10.0, 5.0, 0.0, -5.0, 9.0),
                &xs,
                TrendLink::OtherFixed,
            ))
        }
        Preset::Fig3a => {
            let xs = linspace_step(-10.0, 10.0, 0.1).expect("valid grid");
            sweep_table(&sweep_own_trend(
                &agent(2.0, 1.0, 0.8),
                &econ(12.0, 10.0, 0.0, 0.0, 11.0),
                &xs,
                TrendLink::Locked,
            ))
        }
        Preset::Fig3b => {
            let xs = linspace_step(-5.0, 5.0, 0.1).expect("valid grid");
            sweep_table(&sweep_other_trend(
                &agent(2.0, 1.0, 0.8),
                &econ(12.0, 10.0, 0.0, 0.0, 11.0),
                &xs,
            ))
        }
        Preset::FigC1 => {
            // Curves use a in {6, 2, 1} with b = 0.5, i.e. ratios 12, 4 and 2.
            let e = econ(10.0, 15.0, -6.0, -10.0, 9.0);
            let agents = [agent(6.0, 0.5, 0.8), agent(2.0, 0.5, 0.8), agent(1.0, 0.5, 0.8)];
            let mut t = Table::new(["s", "utility_a6", "utility_a2", "utility_a1"]);
            t.rows = share_grid()
                .into_iter()
                .map(|s| {
                    let s = s.min(1.0);
                    std::iter::once(Some(s))
                        .chain(agents.iter().map(|a| Some(dictator_utility(a, &e, s).expect("s in [0, 1]").total)))
                        .collect()
                })
                .collect();
            t
        }
    }
}
