//! Closed-form maximization of the dictator's utility over the kept share.
//!
//! The objective is a concave quadratic on each side of the kink
//! `s = -d_i / T`, and the two pieces glue into a concave function. The
//! unconstrained maximizer is therefore one of three candidates (the gain-side
//! vertex, the loss-side vertex or the kink), selected by comparing the type
//! ratio `a/b` with the threshold `H`. Clamping that point to `[0, 1]` gives
//! the constrained maximizer.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AgentParams, EconomyState, Outcome};

/// Critical values of the type ratio `a/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Above `h` the gain-side vertex is optimal, below `h / (1 + eta)` the
    /// loss-side vertex.
    pub h: f64,
    /// At or above this ratio the dictator keeps the whole pot.
    pub u_bound: f64,
    /// At or below this ratio the dictator gives the whole pot away.
    pub l_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    UpperInterior,
    LossInterior,
    Kink,
    CornerKeepAll,
    CornerGiveAll,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::UpperInterior => "upper-interior",
            Region::LossInterior => "loss-interior",
            Region::Kink => "kink",
            Region::CornerKeepAll => "corner-keep-all",
            Region::CornerGiveAll => "corner-give-all",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    pub s_star: f64,
    pub region: Region,
    /// Maximizer before clamping to `[0, 1]`; `+inf` for a selfish agent.
    pub s_unclamped: f64,
    pub thresholds: Thresholds,
    /// Amount handed to the recipient, `(1 - s_star) * T`.
    pub giving: f64,
}

impl SolveResult {
    pub fn outcome(&self, econ: &EconomyState) -> Outcome {
        Outcome::at(econ, self.s_star)
    }
}

/// `u_bound > l_bound` holds whenever `u_bound > -4T / eta`. Below that both
/// bounds are negative, so every positive type ratio lies above `u_bound` and
/// the order between them does not matter.
pub fn thresholds(econ: &EconomyState, agent: &AgentParams) -> Thresholds {
    let (w_i, w_j, d_i, d_j, t) = (econ.w_i(), econ.w_j(), econ.d_i(), econ.d_j(), econ.t_pot());
    Thresholds {
        h: w_i - w_j - 2.0 * t - 3.0 * d_i - d_j,
        u_bound: w_i - w_j + d_i - d_j + 2.0 * t,
        l_bound: (w_i - w_j + d_i - d_j - 2.0 * t) / (1.0 + agent.eta()),
    }
}

/// Common offset of both vertex formulas: `1/2 + (W_j - W_i + d_j - d_i) / 4T`.
fn vertex_offset(econ: &EconomyState) -> f64 {
    let four_t = 4.0 * econ.t_pot();
    0.5 + (econ.w_j() - econ.w_i()) / four_t + (econ.d_j() - econ.d_i()) / four_t
}

/// Maximizer of the gain-side quadratic.
pub fn upper_vertex(ratio: f64, econ: &EconomyState) -> f64 {
    ratio / (4.0 * econ.t_pot()) + vertex_offset(econ)
}

/// Maximizer of the loss-side quadratic.
pub fn loss_vertex(ratio: f64, eta: f64, econ: &EconomyState) -> f64 {
    ratio * (1.0 + eta) / (4.0 * econ.t_pot()) + vertex_offset(econ)
}

pub fn solve(agent: &AgentParams, econ: &EconomyState) -> SolveResult {
    let th = thresholds(econ, agent);
    let t = econ.t_pot();

    let Some(ratio) = agent.type_ratio() else {
        return SolveResult {
            s_star: 1.0,
            region: Region::CornerKeepAll,
            s_unclamped: f64::INFINITY,
            thresholds: th,
            giving: 0.0,
        };
    };

    let eta = agent.eta();
    let (s_unclamped, interior) = if ratio > th.h {
        (upper_vertex(ratio, econ), Region::UpperInterior)
    } else if ratio < th.h / (1.0 + eta) {
        (loss_vertex(ratio, eta, econ), Region::LossInterior)
    } else {
        (econ.kink_share(), Region::Kink)
    };

    let (s_star, region) = if s_unclamped >= 1.0 {
        (1.0, Region::CornerKeepAll)
    } else if s_unclamped <= 0.0 {
        (0.0, Region::CornerGiveAll)
    } else {
        (s_unclamped, interior)
    };

    SolveResult {
        s_star,
        region,
        s_unclamped,
        thresholds: th,
        giving: (1.0 - s_star) * t,
    }
}

/// Trend-blind benchmark share: the gain-side vertex with every trend term
/// dropped, clamped to `[0, 1]`.
pub fn bo_baseline(agent: &AgentParams, econ: &EconomyState) -> Result<f64> {
    let ratio = agent
        .type_ratio()
        .ok_or_else(|| Error::invalid("b", "benchmark share needs b > 0"))?;
    let four_t = 4.0 * econ.t_pot();
    let s = ratio / four_t + 0.5 + (econ.w_j() - econ.w_i()) / four_t;
    Ok(s.clamp(0.0, 1.0))
}

/// How the recipient's trend moves when the dictator's trend is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendLink {
    /// Recipient's trend equals the dictator's at every point.
    Locked,
    /// Recipient's trend stays at its value in the base economy.
    OtherFixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub result: SolveResult,
    /// Benchmark share, absent for a selfish agent.
    pub bo: Option<f64>,
}

pub fn sweep_own_trend(
    agent: &AgentParams,
    econ: &EconomyState,
    d_range: &[f64],
    link: TrendLink,
) -> Vec<SweepPoint> {
    d_range
        .iter()
        .map(|&d| {
            let d_j = match link {
                TrendLink::Locked => d,
                TrendLink::OtherFixed => econ.d_j(),
            };
            point(agent, &econ.with_trends(d, d_j), d)
        })
        .collect()
}

pub fn sweep_other_trend(agent: &AgentParams, econ: &EconomyState, d_j_range: &[f64]) -> Vec<SweepPoint> {
    d_j_range
        .iter()
        .map(|&d_j| point(agent, &econ.with_trends(econ.d_i(), d_j), d_j))
        .collect()
}

fn point(agent: &AgentParams, econ: &EconomyState, x: f64) -> SweepPoint {
    SweepPoint {
        x,
        result: solve(agent, econ),
        bo: bo_baseline(agent, econ).ok(),
    }
}

/// Evenly spaced values `from, from + step, ..., to` computed by index so
/// that rounding does not accumulate. `step` must be positive.
pub fn linspace_step(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("step", format!("must be > 0, got {step}")));
    }
    if !(from.is_finite() && to.is_finite()) || to < from {
        return Err(Error::invalid("to", format!("range {from}..{to} is empty or not finite")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(ratio: f64, eta: f64) -> AgentParams {
        AgentParams::from_ratio(ratio, eta).unwrap()
    }

    fn econ(w_i: f64, w_j: f64, d_i: f64, d_j: f64, t: f64) -> EconomyState {
        EconomyState::new(w_i, w_j, d_i, d_j, t).unwrap()
    }

    #[test]
    fn threshold_examples() {
        for d in [-10.0, -5.5, 0.0, 3.0] {
            let th = thresholds(&econ(12.0, 10.0, d, d, 11.0), &agent(2.0, 0.8));
            assert!((th.h - (-20.0 - 4.0 * d)).abs() < 1e-12);
        }
        let th = thresholds(&econ(15.0, 18.0, -9.0, 9.0, 11.0), &agent(2.0, 0.8));
        assert_eq!(th.u_bound, 1.0);
        let th = thresholds(&econ(12.0, 12.0, 1.0, 1.0, 11.0), &agent(2.0, 0.0));
        assert_eq!(th.l_bound, -22.0);
        assert_eq!(th.u_bound, 22.0);
    }

    #[test]
    fn upper_interior_example() {
        let r = solve(&agent(2.0, 0.8), &econ(12.0, 10.0, 0.0, 3.0, 11.0));
        assert_eq!(r.region, Region::UpperInterior);
        assert!((r.s_star - (0.5 + 3.0 / 44.0)).abs() < 1e-12);
        assert!((r.giving - (1.0 - r.s_star) * 11.0).abs() < 1e-15);
    }

    #[test]
    fn loss_interior_example() {
        let r = solve(&agent(2.0, 0.8), &econ(12.0, 10.0, -10.0, -10.0, 11.0));
        assert_eq!(r.region, Region::LossInterior);
        assert!((r.s_star - (0.5 + 1.6 / 44.0)).abs() < 1e-12);
        assert!(r.outcome(&econ(12.0, 10.0, -10.0, -10.0, 11.0)).t_i < 0.0);
    }

    #[test]
    fn kink_example() {
        let e = econ(10.0, 5.0, -4.5, -5.0, 9.0);
        let r = solve(&agent(4.0, 0.8), &e);
        assert_eq!(r.region, Region::Kink);
        assert!((r.s_star - 0.5).abs() < 1e-12);
        assert!(r.outcome(&e).t_i.abs() < 1e-9);
    }

    #[test]
    fn keep_all_corner_example() {
        let r = solve(&agent(2.0, 0.8), &econ(15.0, 18.0, -9.0, 9.0, 11.0));
        assert_eq!(r.region, Region::CornerKeepAll);
        assert_eq!(r.s_star, 1.0);
        assert_eq!(r.giving, 0.0);
        assert!(r.s_unclamped >= 1.0);
    }

    #[test]
    fn selfish_keeps_everything() {
        let selfish = AgentParams::selfish(0.3).unwrap();
        let r = solve(&selfish, &econ(12.0, 10.0, 0.0, 0.0, 11.0));
        assert_eq!(r.region, Region::CornerKeepAll);
        assert_eq!(r.s_star, 1.0);
        assert!(bo_baseline(&selfish, &econ(12.0, 10.0, 0.0, 0.0, 11.0)).is_err());
    }

    #[test]
    fn bo_baseline_examples() {
        let s = bo_baseline(&agent(2.0, 0.8), &econ(12.0, 10.0, 0.0, 3.0, 11.0)).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        let s = bo_baseline(&agent(4.0, 0.8), &econ(10.0, 5.0, -7.0, 2.0, 9.0)).unwrap();
        assert!((s - (4.0 / 36.0 + 0.5 - 5.0 / 36.0)).abs() < 1e-15);
        let s = bo_baseline(&agent(1e9, 0.8), &econ(10.0, 5.0, 0.0, 0.0, 9.0)).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn zero_eta_has_no_kink_band() {
        // With eta = 0 the two vertex formulas coincide and the kink band
        // [H/(1+eta), H] shrinks to a point.
        let a = agent(2.0, 0.0);
        let e = econ(12.0, 10.0, -8.0, -8.0, 11.0);
        assert_eq!(upper_vertex(2.0, &e), loss_vertex(2.0, 0.0, &e));
        let grid = linspace_step(-10.0, 10.0, 0.01).unwrap();
        for p in sweep_own_trend(&a, &e, &grid, TrendLink::Locked) {
            if p.result.region == Region::Kink {
                let th = p.result.thresholds;
                assert!((th.h - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bounds_can_cross_when_both_are_negative() {
        let a = agent(0.5, 0.9);
        let e = econ(2.0, 28.0, -2.0, 20.0, 3.0);
        let th = thresholds(&e, &a);
        assert!(th.l_bound > th.u_bound);
        assert!(th.l_bound < 0.0);
        assert_eq!(solve(&a, &e).s_star, 1.0);
        for eta in [0.0, 0.3, 0.9] {
            for x in [-40.0, -10.0, 0.0, 10.0] {
                let th = thresholds(&econ(20.0, 20.0 - x, 0.0, 0.0, 3.0), &agent(1.0, eta));
                if th.u_bound >= 0.0 {
                    assert!(th.u_bound > th.l_bound);
                }
            }
        }
    }

    #[test]
    fn ties_at_thresholds_are_harmless() {
        // a/b == H up to rounding: whichever branch is taken, the kink and the
        // gain-side vertex coincide.
        let a = agent(2.0, 0.8);
        let e = econ(12.0, 10.0, -5.5, -5.5, 11.0);
        let th = thresholds(&e, &a);
        assert!((th.h - 2.0).abs() < 1e-12);
        let r = solve(&a, &e);
        assert!(matches!(r.region, Region::Kink | Region::UpperInterior));
        assert!((r.s_star - upper_vertex(2.0, &e)).abs() < 1e-12);
        assert!((r.s_star - e.kink_share()).abs() < 1e-12);

        // a/b == H/(1+eta): kink equals the loss-side vertex.
        let e = econ(12.0, 10.0, -5.9, -5.9, 11.0);
        let th = thresholds(&e, &a);
        assert!((th.h / 1.8 - 2.0).abs() < 1e-12);
        let r = solve(&a, &e);
        assert!((r.s_star - loss_vertex(2.0, 0.8, &e)).abs() < 1e-12);

        // a/b == U: keep-all corner, and the vertex sits exactly at 1.
        let e = econ(15.0, 18.0, -9.0, 8.0, 11.0);
        assert!((thresholds(&e, &a).u_bound - 2.0).abs() < 1e-12);
        let r = solve(&a, &e);
        assert!((r.s_star - 1.0).abs() < 1e-12);
        assert!((r.s_unclamped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fig2b_sweep_branches() {
        let a = agent(4.0, 0.8);
        let base = econ(10.0, 5.0, 0.0, -5.0, 9.0);
        let pts = sweep_own_trend(&a, &base, &[-10.0, -5.0, -4.5, 0.0, 10.0], TrendLink::OtherFixed);
        let regions: Vec<_> = pts.iter().map(|p| p.result.region).collect();
        assert_eq!(
            regions,
            [
                Region::LossInterior,
                Region::Kink,
                Region::Kink,
                Region::UpperInterior,
                Region::UpperInterior
            ]
        );
        for p in &pts {
            assert!(p.result.thresholds.h == -8.0 - 3.0 * p.x);
        }
    }

    #[test]
    fn fig3b_sweep_matches_line() {
        let a = agent(2.0, 0.8);
        let base = econ(12.0, 10.0, 0.0, 0.0, 11.0);
        let xs = linspace_step(-5.0, 5.0, 0.5).unwrap();
        for p in sweep_other_trend(&a, &base, &xs) {
            assert!((p.result.s_star - (0.5 + p.x / 44.0)).abs() < 1e-12);
            assert!((p.bo.unwrap() - 0.5).abs() < 1e-15);
        }
        // Matching trends agree with the own-trend sweep at that point.
        let own = sweep_own_trend(&a, &base, &[0.0], TrendLink::Locked);
        let other = sweep_other_trend(&a, &base, &[0.0]);
        assert_eq!(own[0].result, other[0].result);
    }

    #[test]
    fn large_other_trend_hits_give_all() {
        let a = agent(2.0, 0.8);
        let base = econ(12.0, 10.0, 0.0, 0.0, 11.0);
        let pts = sweep_other_trend(&a, &base, &[-100.0]);
        let r = pts[0].result;
        assert!(2.0 <= r.thresholds.l_bound);
        assert_eq!(r.s_star, 0.0);
        assert_eq!(r.region, Region::CornerGiveAll);
    }

    #[test]
    fn linspace_by_index() {
        let v = linspace_step(-5.0, 5.0, 0.1).unwrap();
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], -5.0);
        assert!((v[100] - 5.0).abs() < 1e-12);
        assert_eq!(linspace_step(0.0, 0.0, 1.0).unwrap(), vec![0.0]);
        assert!(linspace_step(0.0, 1.0, 0.0).is_err());
        assert!(linspace_step(1.0, 0.0, 0.1).is_err());
    }
}
