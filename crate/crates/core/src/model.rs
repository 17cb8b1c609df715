//! Utility model with trend-dependent preferences.
//!
//! An individual cares about four things: final income, the sign of their own
//! final income trend (only losses count), and the squared half-gaps between
//! their income and trend and those of the other person.

use crate::error::{Error, Result};

/// Preference weights of one individual.
///
/// `a` weighs personal concerns, `b` social concerns and `eta` scales the
/// penalty on a negative own trend. `b == 0` is the purely selfish limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    a: f64,
    b: f64,
    eta: f64,
}

impl AgentParams {
    pub fn new(a: f64, b: f64, eta: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid("a", format!("must be finite and > 0, got {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::invalid("b", format!("must be finite and >= 0, got {b}")));
        }
        check_eta(eta)?;
        Ok(Self { a, b, eta })
    }

    /// Agent with `a = ratio`, `b = 1`, i.e. the given type ratio `a/b`.
    pub fn from_ratio(ratio: f64, eta: f64) -> Result<Self> {
        Self::new(ratio, 1.0, eta)
    }

    /// Purely selfish agent (`b = 0`).
    pub fn selfish(eta: f64) -> Result<Self> {
        Self::new(1.0, 0.0, eta)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The type ratio `a/b`; `None` for a selfish agent.
    pub fn type_ratio(&self) -> Option<f64> {
        (self.b > 0.0).then(|| self.a / self.b)
    }

    pub fn is_selfish(&self) -> bool {
        self.b == 0.0
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid("eta", format!("must lie in [0, 1), got {eta}")));
    }
    Ok(())
}

/// Everything fixed before the dictator moves: summed wages, wage trends
/// (second sub-period wage minus first) and the tax account to split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyState {
    w_i: f64,
    w_j: f64,
    d_i: f64,
    d_j: f64,
    t_pot: f64,
}

impl EconomyState {
    pub fn new(w_i: f64, w_j: f64, d_i: f64, d_j: f64, t_pot: f64) -> Result<Self> {
        if !(w_i.is_finite() && w_i > 0.0) {
            return Err(Error::invalid("w_i", format!("must be finite and > 0, got {w_i}")));
        }
        if !(w_j.is_finite() && w_j > 0.0) {
            return Err(Error::invalid("w_j", format!("must be finite and > 0, got {w_j}")));
        }
        if !d_i.is_finite() {
            return Err(Error::invalid("d_i", "must be finite"));
        }
        if !d_j.is_finite() {
            return Err(Error::invalid("d_j", "must be finite"));
        }
        if !(t_pot.is_finite() && t_pot > 0.0) {
            return Err(Error::DegenerateTax(t_pot));
        }
        Ok(Self {
            w_i,
            w_j,
            d_i,
            d_j,
            t_pot,
        })
    }

    pub fn w_i(&self) -> f64 {
        self.w_i
    }

    pub fn w_j(&self) -> f64 {
        self.w_j
    }

    pub fn d_i(&self) -> f64 {
        self.d_i
    }

    pub fn d_j(&self) -> f64 {
        self.d_j
    }

    pub fn t_pot(&self) -> f64 {
        self.t_pot
    }

    /// Same wages and pot with different trends.
    pub fn with_trends(&self, d_i: f64, d_j: f64) -> Self {
        assert!(d_i.is_finite() && d_j.is_finite(), "trends must be finite");
        Self { d_i, d_j, ..*self }
    }

    /// True when a trend is larger in magnitude than the wages behind it.
    /// The model tolerates this, but it cannot arise from real wage streams.
    pub fn trend_exceeds_income(&self) -> bool {
        self.d_i.abs() > self.w_i || self.d_j.abs() > self.w_j
    }

    /// Kept share at which the dictator's final trend is exactly zero.
    pub fn kink_share(&self) -> f64 {
        -self.d_i / self.t_pot
    }
}

/// Final incomes and trends of both players after the dictator keeps share `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub y_i: f64,
    pub y_j: f64,
    pub t_i: f64,
    pub t_j: f64,
}

impl Outcome {
    pub fn at(econ: &EconomyState, s: f64) -> Self {
        let kept = s * econ.t_pot;
        let given = (1.0 - s) * econ.t_pot;
        Self {
            y_i: econ.w_i + kept,
            y_j: econ.w_j + given,
            t_i: econ.d_i + kept,
            t_j: econ.d_j + given,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityBreakdown {
    pub material: f64,
    pub trend_loss: f64,
    pub income_ineq: f64,
    pub trend_ineq: f64,
    pub total: f64,
}

/// Gain-loss on one's own trend: `eta * t` below zero, nothing above.
pub fn trend_gain_loss(t: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(if t < 0.0 { eta * t } else { 0.0 })
}

/// Squared distance of `x_self` from the midpoint of the two values.
pub fn relative_motivation(x_self: f64, x_other: f64) -> f64 {
    let half_gap = 0.5 * (x_self - x_other);
    half_gap * half_gap
}

pub fn utility(agent: &AgentParams, y_i: f64, y_j: f64, t_i: f64, t_j: f64) -> UtilityBreakdown {
    let material = agent.a * y_i;
    let trend_loss = if t_i < 0.0 { agent.a * agent.eta * t_i } else { 0.0 };
    let income_ineq = -agent.b * relative_motivation(y_i, y_j);
    let trend_ineq = -agent.b * relative_motivation(t_i, t_j);
    UtilityBreakdown {
        material,
        trend_loss,
        income_ineq,
        trend_ineq,
        total: material + trend_loss + income_ineq + trend_ineq,
    }
}

fn check_share(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ShareOutOfRange(s));
    }
    Ok(())
}

/// Dictator's utility from keeping share `s` of the pot.
pub fn dictator_utility(agent: &AgentParams, econ: &EconomyState, s: f64) -> Result<UtilityBreakdown> {
    check_share(s)?;
    let o = Outcome::at(econ, s);
    Ok(utility(agent, o.y_i, o.y_j, o.t_i, o.t_j))
}

fn inequality_penalty(agent: &AgentParams, econ: &EconomyState, s: f64) -> f64 {
    let two_st = 2.0 * s * econ.t_pot;
    let income_gap = 0.5 * (econ.w_i - econ.w_j + two_st - econ.t_pot);
    let trend_gap = 0.5 * (econ.d_i - econ.d_j + two_st - econ.t_pot);
    agent.b * (income_gap * income_gap + trend_gap * trend_gap)
}

/// Gain-side piece of the dictator's utility, evaluated for any real `s`.
/// Coincides with [`dictator_utility`] wherever the final trend is nonnegative.
pub fn upper_branch(agent: &AgentParams, econ: &EconomyState, s: f64) -> f64 {
    agent.a * (econ.w_i + s * econ.t_pot) - inequality_penalty(agent, econ, s)
}

/// Loss-side piece, evaluated for any real `s`. Coincides with
/// [`dictator_utility`] wherever the final trend is negative.
pub fn loss_branch(agent: &AgentParams, econ: &EconomyState, s: f64) -> f64 {
    let st = s * econ.t_pot;
    agent.a * (econ.w_i + st + agent.eta * (econ.d_i + st)) - inequality_penalty(agent, econ, s)
}

/// Trend-blind benchmark: material payoff minus income inequality only.
pub fn bo_dictator_utility(agent: &AgentParams, econ: &EconomyState, s: f64) -> Result<f64> {
    check_share(s)?;
    let o = Outcome::at(econ, s);
    Ok(agent.a * o.y_i - agent.b * relative_motivation(o.y_i, o.y_j))
}
