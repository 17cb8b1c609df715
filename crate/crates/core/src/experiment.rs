//! The laboratory protocol: five wage schedules, two fixed roles, and a joint
//! account funded by a third of every wage.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AgentParams, EconomyState};
use crate::oracle::discrete_argmax;
use crate::solver::{solve, Region};

/// Lab choices move in 10-cent steps.
pub const GIVING_TICK: f64 = 0.10;

/// Size of the joint account in every treatment.
pub const JOINT_ACCOUNT: f64 = 11.0;

const TAX_RATE: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Treatment {
    Stable,
    IntraDecrease,
    IntraIncrease,
    IntraInterChange,
    CatchingUp,
}

impl Treatment {
    pub const ALL: [Treatment; 5] = [
        Treatment::Stable,
        Treatment::IntraDecrease,
        Treatment::IntraIncrease,
        Treatment::IntraInterChange,
        Treatment::CatchingUp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Treatment::Stable => "stable",
            Treatment::IntraDecrease => "intra-decrease",
            Treatment::IntraIncrease => "intra-increase",
            Treatment::IntraInterChange => "intra-inter-change",
            Treatment::CatchingUp => "catching-up",
        }
    }

    pub fn spec(&self) -> TreatmentSpec {
        let (high_wages, low_wages) = match self {
            Treatment::Stable => ((9.0, 9.0), (7.5, 7.5)),
            Treatment::IntraDecrease => ((13.5, 4.5), (12.0, 3.0)),
            Treatment::IntraIncrease => ((4.5, 13.5), (3.0, 12.0)),
            Treatment::IntraInterChange => ((4.5, 13.5), (12.0, 3.0)),
            Treatment::CatchingUp => ((9.0, 9.0), (6.0, 9.0)),
        };
        TreatmentSpec {
            id: *self,
            high_wages,
            low_wages,
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Treatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Treatment::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownId {
                kind: "treatment",
                value: s.to_owned(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    HighEarner,
    LowEarner,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::HighEarner, Role::LowEarner];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::HighEarner => "high",
            Role::LowEarner => "low",
        }
    }

    pub fn other(&self) -> Role {
        match self {
            Role::HighEarner => Role::LowEarner,
            Role::LowEarner => Role::HighEarner,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Role::HighEarner),
            "low" => Ok(Role::LowEarner),
            _ => Err(Error::UnknownId {
                kind: "role",
                value: s.to_owned(),
            }),
        }
    }
}

/// Wages `(first sub-period, second sub-period)` of both roles in one treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreatmentSpec {
    pub id: Treatment,
    pub high_wages: (f64, f64),
    pub low_wages: (f64, f64),
}

impl TreatmentSpec {
    pub fn wages(&self, role: Role) -> (f64, f64) {
        match role {
            Role::HighEarner => self.high_wages,
            Role::LowEarner => self.low_wages,
        }
    }
}

pub fn wage_schedule(treatment: Treatment, role: Role) -> (f64, f64) {
    treatment.spec().wages(role)
}

pub fn tax_pot(treatment: Treatment) -> f64 {
    let spec = treatment.spec();
    let gross = spec.high_wages.0 + spec.high_wages.1 + spec.low_wages.0 + spec.low_wages.1;
    let pot = gross * TAX_RATE;
    debug_assert!((pot - JOINT_ACCOUNT).abs() < 1e-12);
    pot
}

/// The dictator problem faced by `role` in `treatment`.
pub fn economy_for(treatment: Treatment, role: Role) -> EconomyState {
    let spec = treatment.spec();
    let (own1, own2) = spec.wages(role);
    let (other1, other2) = spec.wages(role.other());
    EconomyState::new(own1 + own2, other1 + other2, own2 - own1, other2 - other1, tax_pot(treatment))
        .expect("treatment schedules are valid economies")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub treatment: Treatment,
    pub role: Role,
    pub s_star: f64,
    pub giving: f64,
    pub region: Region,
}

/// Continuous model prediction.
pub fn predict_giving(agent: &AgentParams, treatment: Treatment, role: Role) -> Prediction {
    let econ = economy_for(treatment, role);
    let r = solve(agent, &econ);
    Prediction {
        treatment,
        role,
        s_star: r.s_star,
        giving: r.giving,
        region: r.region,
    }
}

/// Prediction restricted to the lab's 10-cent choice set. The region label is
/// the one of the continuous solution.
pub fn predict_giving_discrete(agent: &AgentParams, treatment: Treatment, role: Role) -> Prediction {
    let econ = economy_for(treatment, role);
    let choice = discrete_argmax(agent, &econ, GIVING_TICK).expect("0.10 divides the joint account");
    Prediction {
        treatment,
        role,
        s_star: choice.s,
        giving: choice.giving,
        region: solve(agent, &econ).region,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    Continuous,
    Discrete,
}

pub fn predict(agent: &AgentParams, treatment: Treatment, role: Role, mode: PredictionMode) -> Prediction {
    match mode {
        PredictionMode::Continuous => predict_giving(agent, treatment, role),
        PredictionMode::Discrete => predict_giving_discrete(agent, treatment, role),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    HoldsWeakly,
    Fails,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWeakly => "holds-weakly",
            Verdict::Fails => "fails",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// "`role` gives less in every `less` treatment than in every `more` treatment."
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub label: &'static str,
    pub role: Role,
    pub less: &'static [Treatment],
    pub more: &'static [Treatment],
}

pub fn hypotheses() -> [Hypothesis; 4] {
    use Treatment::*;
    [
        Hypothesis {
            label: "H1",
            role: Role::HighEarner,
            less: &[IntraDecrease, CatchingUp],
            more: &[Stable, IntraIncrease, IntraInterChange],
        },
        Hypothesis {
            label: "H2",
            role: Role::LowEarner,
            less: &[IntraInterChange, IntraDecrease],
            more: &[Stable, IntraIncrease, CatchingUp],
        },
        Hypothesis {
            label: "H3",
            role: Role::LowEarner,
            less: &[IntraInterChange],
            more: &[IntraDecrease, Stable, IntraIncrease, CatchingUp],
        },
        Hypothesis {
            label: "H4",
            role: Role::LowEarner,
            less: &[IntraInterChange],
            more: &[IntraDecrease],
        },
    ]
}

/// Strictness margin for "gives less".
pub const ORDER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisVerdict {
    pub hypothesis: Hypothesis,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// All ten (treatment, role) predictions, high earners first.
    pub predictions: Vec<Prediction>,
    pub verdicts: Vec<HypothesisVerdict>,
    /// Model predictions outside the stated hypotheses.
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn giving(&self, treatment: Treatment, role: Role) -> f64 {
        self.predictions
            .iter()
            .find(|p| p.treatment == treatment && p.role == role)
            .map(|p| p.giving)
            .expect("report covers every treatment and role")
    }
}

fn judge(h: &Hypothesis, giving: impl Fn(Treatment) -> f64) -> Verdict {
    let mut strict = true;
    for &l in h.less {
        for &m in h.more {
            let (gl, gm) = (giving(l), giving(m));
            if gl > gm + ORDER_TOLERANCE {
                return Verdict::Fails;
            }
            if gl >= gm - ORDER_TOLERANCE {
                strict = false;
            }
        }
    }
    if strict {
        Verdict::Holds
    } else {
        Verdict::HoldsWeakly
    }
}

pub fn evaluate_hypotheses(agent: &AgentParams, mode: PredictionMode) -> HypothesisReport {
    let predictions: Vec<Prediction> = Role::ALL
        .into_iter()
        .flat_map(|role| Treatment::ALL.into_iter().map(move |t| (t, role)))
        .map(|(t, role)| predict(agent, t, role, mode))
        .collect();
    let lookup = |t: Treatment, role: Role| {
        predictions
            .iter()
            .find(|p| p.treatment == t && p.role == role)
            .map(|p| p.giving)
            .unwrap()
    };

    let verdicts = hypotheses()
        .into_iter()
        .map(|h| {
            let verdict = judge(&h, |t| lookup(t, h.role));
            HypothesisVerdict { hypothesis: h, verdict }
        })
        .collect();

    let mut notes = Vec::new();
    let positive_relative = lookup(Treatment::IntraInterChange, Role::HighEarner);
    let baseline = lookup(Treatment::Stable, Role::HighEarner).max(lookup(Treatment::IntraIncrease, Role::HighEarner));
    if positive_relative > baseline + ORDER_TOLERANCE {
        notes.push(format!(
            "high earners give more in intra-inter-change ({positive_relative:.2}) than in stable/intra-increase \
             ({baseline:.2}); model-only prediction, not supported by lab data"
        ));
    }

    HypothesisReport {
        predictions,
        verdicts,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_match_table() {
        assert_eq!(wage_schedule(Treatment::IntraDecrease, Role::HighEarner), (13.5, 4.5));
        assert_eq!(wage_schedule(Treatment::CatchingUp, Role::LowEarner), (6.0, 9.0));
        assert_eq!(wage_schedule(Treatment::Stable, Role::HighEarner), (9.0, 9.0));
        for t in Treatment::ALL {
            let (h1, h2) = wage_schedule(t, Role::HighEarner);
            let (l1, l2) = wage_schedule(t, Role::LowEarner);
            assert_eq!(h1 + h2, 18.0);
            assert_eq!(l1 + l2, 15.0);
            assert!((tax_pot(t) - 11.0).abs() < 1e-12);
        }
    }

    #[test]
    fn economies() {
        let e = economy_for(Treatment::CatchingUp, Role::HighEarner);
        assert_eq!((e.w_i(), e.w_j(), e.d_i(), e.d_j()), (18.0, 15.0, 0.0, 3.0));
        let e = economy_for(Treatment::IntraInterChange, Role::LowEarner);
        assert_eq!((e.w_i(), e.w_j(), e.d_i(), e.d_j()), (15.0, 18.0, -9.0, 9.0));
        let e = economy_for(Treatment::Stable, Role::LowEarner);
        assert_eq!((e.w_i(), e.w_j(), e.d_i(), e.d_j()), (15.0, 18.0, 0.0, 0.0));
        assert!((e.t_pot() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn ids_parse_and_print() {
        for t in Treatment::ALL {
            assert_eq!(t.as_str().parse::<Treatment>().unwrap(), t);
        }
        assert!("Stable".parse::<Treatment>().is_err());
        assert_eq!("high".parse::<Role>().unwrap(), Role::HighEarner);
        assert!("mid".parse::<Role>().is_err());
    }

    #[test]
    fn reference_agent_predictions() {
        let agent = AgentParams::new(2.0, 1.0, 0.8).unwrap();
        let p = predict_giving(&agent, Treatment::Stable, Role::HighEarner);
        assert!((p.s_star - (0.5 - 1.0 / 44.0)).abs() < 1e-12);
        assert!((p.giving - 5.75).abs() < 1e-9);
        let p = predict_giving(&agent, Treatment::CatchingUp, Role::HighEarner);
        assert!((p.giving - 5.0).abs() < 1e-9);
        let p = predict_giving(&agent, Treatment::IntraDecrease, Role::HighEarner);
        assert_eq!(p.region, Region::LossInterior);
        assert!((p.s_star - (0.5 + 0.6 / 44.0)).abs() < 1e-12);
        assert!((p.giving - 5.35).abs() < 1e-9);
        let t_i = -9.0 + p.s_star * 11.0;
        assert!((t_i + 3.35).abs() < 1e-9);
        let p = predict_giving(&agent, Treatment::IntraInterChange, Role::LowEarner);
        assert_eq!(p.region, Region::CornerKeepAll);
        assert_eq!(p.giving, 0.0);
    }

    #[test]
    fn reference_agent_hypotheses_hold() {
        let agent = AgentParams::new(2.0, 1.0, 0.8).unwrap();
        let report = evaluate_hypotheses(&agent, PredictionMode::Continuous);
        assert_eq!(report.predictions.len(), 10);
        for v in &report.verdicts {
            assert_eq!(v.verdict, Verdict::Holds, "{}", v.hypothesis.label);
        }
        assert!((report.giving(Treatment::IntraInterChange, Role::HighEarner) - 10.25).abs() < 1e-9);
        assert_eq!(report.notes.len(), 1);

        let report = evaluate_hypotheses(&agent, PredictionMode::Discrete);
        for v in &report.verdicts {
            assert_eq!(v.verdict, Verdict::Holds, "{}", v.hypothesis.label);
        }
    }

    #[test]
    fn selfish_agent_holds_weakly() {
        let agent = AgentParams::selfish(0.8).unwrap();
        let report = evaluate_hypotheses(&agent, PredictionMode::Continuous);
        assert!(report.predictions.iter().all(|p| p.giving == 0.0));
        for v in &report.verdicts {
            assert_eq!(v.verdict, Verdict::HoldsWeakly);
        }
        assert!(report.notes.is_empty());
    }

    #[test]
    fn reversed_order_fails() {
        let h = &hypotheses()[3];
        assert_eq!(
            judge(h, |t| if t == Treatment::IntraInterChange { 4.0 } else { 3.0 }),
            Verdict::Fails
        );
    }
}
