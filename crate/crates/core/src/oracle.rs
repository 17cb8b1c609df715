//! Brute-force maximizers. They only ever evaluate the utility function, so
//! they serve as an independent check on the closed-form solver, and the
//! discrete one models the lab's 10-cent choice set.

use crate::error::{Error, Result};
use crate::model::{dictator_utility, AgentParams, EconomyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    steps: usize,
    refine_rounds: usize,
}

impl GridSpec {
    pub fn new(steps: usize, refine_rounds: usize) -> Result<Self> {
        if steps < 10 {
            return Err(Error::invalid("steps", format!("need at least 10 grid intervals, got {steps}")));
        }
        Ok(Self { steps, refine_rounds })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn refine_rounds(&self) -> usize {
        self.refine_rounds
    }

    /// Spacing of the last grid evaluated, assuming no bracket hits `[0, 1]`'s edges.
    pub fn resolution(&self) -> f64 {
        let n = self.steps as f64;
        (0..self.refine_rounds).fold(1.0 / n, |h, _| 2.0 * h / n)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            steps: 10_000,
            refine_rounds: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub s_best: f64,
    pub u_best: f64,
}

fn eval(agent: &AgentParams, econ: &EconomyState, s: f64) -> f64 {
    dictator_utility(agent, econ, s.clamp(0.0, 1.0))
        .expect("share clamped to [0, 1]")
        .total
}

/// Best point of a uniform grid on `[0, 1]`, then `refine_rounds` passes of
/// the same grid laid over `[best - h, best + h]`. Ties go to the smaller share.
pub fn grid_argmax(agent: &AgentParams, econ: &EconomyState, grid: GridSpec) -> GridOptimum {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut best = GridOptimum {
        s_best: 0.0,
        u_best: eval(agent, econ, 0.0),
    };
    for _ in 0..=grid.refine_rounds {
        let h = (hi - lo) / grid.steps as f64;
        for k in 0..=grid.steps {
            let s = if k == grid.steps { hi } else { lo + k as f64 * h };
            let u = eval(agent, econ, s);
            if u > best.u_best || (u == best.u_best && s < best.s_best) {
                best = GridOptimum { s_best: s, u_best: u };
            }
        }
        lo = (best.s_best - h).max(0.0);
        hi = (best.s_best + h).min(1.0);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteChoice {
    /// Giving measured in ticks.
    pub giving_ticks: u32,
    pub giving: f64,
    pub s: f64,
    pub utility: f64,
}

/// Ticks in the pot when `tick` divides it, `None` otherwise.
pub fn ticks_in_pot(t_pot: f64, tick: f64) -> Option<u32> {
    let n = (t_pot / tick).round();
    ((n * tick - t_pot).abs() <= 1e-9 && n >= 1.0).then_some(n as u32)
}

/// Exhaustive search over giving levels `0, tick, ..., T`.
///
/// Levels whose utility is within a relative `1e-12` of the best are treated
/// as tied, and ties go to the larger gift.
pub fn discrete_argmax(agent: &AgentParams, econ: &EconomyState, tick: f64) -> Result<DiscreteChoice> {
    if !(tick.is_finite() && tick > 0.0) {
        return Err(Error::invalid("tick", format!("must be > 0, got {tick}")));
    }
    let t = econ.t_pot();
    let n = ticks_in_pot(t, tick)
        .ok_or_else(|| Error::invalid("tick", format!("{tick} does not divide the pot {t}")))?;

    let choice = |g: u32| {
        let giving = g as f64 * t / n as f64;
        let s = (1.0 - giving / t).clamp(0.0, 1.0);
        (giving, s, eval(agent, econ, s))
    };
    let utilities: Vec<f64> = (0..=n).map(|g| choice(g).2).collect();
    let max_u = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max_u.abs().max(1.0);
    let g = (0..=n)
        .rev()
        .find(|&g| utilities[g as usize] >= max_u - tol)
        .expect("the maximum is attained");
    let (giving, s, utility) = choice(g);
    Ok(DiscreteChoice {
        giving_ticks: g,
        giving,
        s,
        utility,
    })
}
