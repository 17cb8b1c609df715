//! Synthetic lab sessions.
//!
//! Subjects are paired, each pair keeps its roles for all five periods, and
//! every pair sees the five treatments in its own random order. Both members
//! decide as dictator each period; a fair coin picks the decision that pays.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`. Population sampling uses stream 0 and session play uses
//! stream 1 of the same seed, so identical seeds give identical datasets.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::experiment::{economy_for, Role, Treatment, GIVING_TICK, JOINT_ACCOUNT};
use crate::model::AgentParams;
use crate::oracle::{discrete_argmax, ticks_in_pot};

pub const CSV_HEADER: &str =
    "session_id,subject_id,pair_id,role,period_index,treatment,wage1,wage2,giving,implemented";

/// Distribution of a scalar preference parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamDistribution {
    /// `(value, probability)` atoms.
    PointMass(Vec<(f64, f64)>),
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
}

impl ParamDistribution {
    pub fn point(value: f64) -> Self {
        ParamDistribution::PointMass(vec![(value, 1.0)])
    }

    fn validate(&self, name: &'static str, support: impl Fn(f64) -> bool) -> Result<()> {
        match self {
            ParamDistribution::PointMass(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::invalid(name, "point-mass list is empty"));
                }
                if let Some((v, _)) = atoms.iter().find(|(v, _)| !support(*v)) {
                    return Err(Error::invalid(name, format!("value {v} outside the parameter's range")));
                }
                if atoms.iter().any(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::invalid(name, "probabilities must be nonnegative"));
                }
                let total: f64 = atoms.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(name, format!("probabilities sum to {total}, not 1")));
                }
            }
            ParamDistribution::Uniform { lo, hi } | ParamDistribution::LogUniform { lo, hi } => {
                if lo > hi || !support(*lo) || !support(*hi) {
                    return Err(Error::invalid(name, format!("range {lo}..{hi} is not well-ordered or out of range")));
                }
            }
        }
        if let ParamDistribution::LogUniform { lo, .. } = self {
            if *lo <= 0.0 {
                return Err(Error::invalid(name, "log-uniform range must be positive"));
            }
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ParamDistribution::PointMass(atoms) => {
                if atoms.len() == 1 {
                    return atoms[0].0;
                }
                let index = WeightedIndex::new(atoms.iter().map(|(_, p)| *p)).expect("validated weights");
                atoms[index.sample(rng)].0
            }
            ParamDistribution::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.random_range(*lo..*hi)
                }
            }
            ParamDistribution::LogUniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.random_range(lo.ln()..hi.ln()).exp()
                }
            }
        }
    }
}

impl FromStr for ParamDistribution {
    type Err = Error;

    /// `2`, `1:0.5,4:0.5`, `uniform:0:0.9` or `log-uniform:0.5:10`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("distribution", format!("cannot parse `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let range = |rest: &str| -> Result<(f64, f64)> {
            let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
            Ok((num(lo)?, num(hi)?))
        };
        if let Some(rest) = s.strip_prefix("log-uniform:") {
            let (lo, hi) = range(rest)?;
            return Ok(ParamDistribution::LogUniform { lo, hi });
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            let (lo, hi) = range(rest)?;
            return Ok(ParamDistribution::Uniform { lo, hi });
        }
        if !s.contains(':') {
            return Ok(ParamDistribution::point(num(s)?));
        }
        s.split(',')
            .map(|atom| {
                let (v, p) = atom.split_once(':').ok_or_else(bad)?;
                Ok((num(v)?, num(p)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(ParamDistribution::PointMass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationConfig {
    pub n_subjects: usize,
    pub share_selfish: f64,
    /// Type ratio `a/b` of social subjects (they get `b = 1`).
    pub social_ab: ParamDistribution,
    pub eta: ParamDistribution,
    /// Standard deviation of additive noise on giving, in money.
    pub decision_noise_sd: f64,
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects < 2 || !self.n_subjects.is_multiple_of(2) {
            return Err(Error::OddPopulation(self.n_subjects));
        }
        if !(0.0..=1.0).contains(&self.share_selfish) {
            return Err(Error::invalid("share_selfish", format!("must lie in [0, 1], got {}", self.share_selfish)));
        }
        self.social_ab.validate("social_ab", |v| v.is_finite() && v > 0.0)?;
        self.eta.validate("eta", |v| (0.0..1.0).contains(&v))?;
        if let ParamDistribution::Uniform { hi, .. } = self.eta {
            // Uniform draws never reach the upper end, but it must still be < 1.
            if hi >= 1.0 {
                return Err(Error::invalid("eta", "upper end must be < 1"));
            }
        }
        if !(self.decision_noise_sd.is_finite() && self.decision_noise_sd >= 0.0) {
            return Err(Error::invalid("noise_sd", format!("must be >= 0, got {}", self.decision_noise_sd)));
        }
        Ok(())
    }

    /// Number of selfish subjects; fractional counts round up.
    pub fn selfish_count(&self) -> usize {
        let exact = self.share_selfish * self.n_subjects as f64;
        ((exact - 1e-9).ceil().max(0.0) as usize).min(self.n_subjects)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subject {
    pub id: u32,
    pub params: AgentParams,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Subjects with ids `1..=n`. Selfish subjects get `b = 0` and `eta = 0`.
pub fn sample_population(config: &PopulationConfig, seed: u64) -> Result<Vec<Subject>> {
    config.validate()?;
    let mut rng = rng_for(seed, 0);
    let n = config.n_subjects;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut selfish = vec![false; n];
    for &i in &order[..config.selfish_count()] {
        selfish[i] = true;
    }
    selfish
        .into_iter()
        .enumerate()
        .map(|(i, is_selfish)| {
            let params = if is_selfish {
                AgentParams::selfish(0.0)?
            } else {
                let ratio = config.social_ab.sample(&mut rng);
                let eta = config.eta.sample(&mut rng);
                AgentParams::from_ratio(ratio, eta)?
            };
            Ok(Subject {
                id: i as u32 + 1,
                params,
            })
        })
        .collect()
}

/// One subject's decision in one period.
#[derive(Debug, Clone, PartialEq)]
pub struct GivingRecord {
    pub session_id: u32,
    pub subject_id: u32,
    pub pair_id: u32,
    pub role: Role,
    pub period_index: u8,
    pub treatment: Treatment,
    pub wage1: f64,
    pub wage2: f64,
    pub giving: f64,
    pub implemented: bool,
}

impl GivingRecord {
    pub fn sort_key(&self) -> (u32, u32, u8, Role) {
        (self.session_id, self.pair_id, self.period_index, self.role)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub session_id: u32,
    pub noise_sd: f64,
}

fn ticks_to_money(ticks: u32) -> f64 {
    ticks as f64 / 10.0
}

/// Plays five periods with `population`, which must have an even size.
pub fn run_session(population: &[Subject], params: SessionParams, seed: u64) -> Result<Vec<GivingRecord>> {
    if population.len() < 2 || !population.len().is_multiple_of(2) {
        return Err(Error::OddPopulation(population.len()));
    }
    if !(params.noise_sd.is_finite() && params.noise_sd >= 0.0) {
        return Err(Error::invalid("noise_sd", format!("must be >= 0, got {}", params.noise_sd)));
    }
    let max_ticks = ticks_in_pot(JOINT_ACCOUNT, GIVING_TICK).expect("tick divides the pot");
    let noise = Normal::new(0.0, params.noise_sd).expect("validated sd");
    let mut rng = rng_for(seed, 1);

    let mut seats: Vec<&Subject> = population.iter().collect();
    seats.shuffle(&mut rng);

    let mut records = Vec::with_capacity(population.len() * Treatment::ALL.len());
    for (pair_index, pair) in seats.chunks_exact(2).enumerate() {
        let (high, low) = if rng.random_bool(0.5) {
            (pair[0], pair[1])
        } else {
            (pair[1], pair[0])
        };
        let mut order = Treatment::ALL;
        order.shuffle(&mut rng);

        for (period, &treatment) in order.iter().enumerate() {
            let high_pays = rng.random_bool(0.5);
            for (subject, role) in [(high, Role::HighEarner), (low, Role::LowEarner)] {
                let econ = economy_for(treatment, role);
                let base = discrete_argmax(&subject.params, &econ, GIVING_TICK)?.giving_ticks;
                let ticks = if params.noise_sd > 0.0 {
                    let noisy = (ticks_to_money(base) + noise.sample(&mut rng)).clamp(0.0, JOINT_ACCOUNT);
                    ((noisy / GIVING_TICK).round() as u32).min(max_ticks)
                } else {
                    base
                };
                let (wage1, wage2) = treatment.spec().wages(role);
                records.push(GivingRecord {
                    session_id: params.session_id,
                    subject_id: subject.id,
                    pair_id: pair_index as u32 + 1,
                    role,
                    period_index: period as u8 + 1,
                    treatment,
                    wage1,
                    wage2,
                    giving: ticks_to_money(ticks),
                    implemented: high_pays == (role == Role::HighEarner),
                });
            }
        }
    }
    Ok(records)
}

/// Samples a population and runs it as session 1.
pub fn simulate(config: &PopulationConfig, seed: u64) -> Result<Vec<GivingRecord>> {
    let population = sample_population(config, seed)?;
    run_session(
        &population,
        SessionParams {
            session_id: 1,
            noise_sd: config.decision_noise_sd,
        },
        seed,
    )
}

/// Writes the canonical CSV layout, rows ordered by session, pair, period, role.
pub fn write_csv<W: Write>(records: &[GivingRecord], mut out: W) -> std::io::Result<()> {
    let mut sorted: Vec<&GivingRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    writeln!(out, "{CSV_HEADER}")?;
    for r in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.2},{:.2},{:.2},{}",
            r.session_id,
            r.subject_id,
            r.pair_id,
            r.role,
            r.period_index,
            r.treatment,
            r.wage1,
            r.wage2,
            r.giving,
            u8::from(r.implemented)
        )?;
    }
    out.flush()
}

pub fn export_csv(records: &[GivingRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(records, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
