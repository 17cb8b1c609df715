//! Redistribution under inequity aversion with income trends.
//!
//! A dictator splits a tax account with a recipient, caring about final
//! income, losses in their own income trend, and inequality in both incomes
//! and trends. The crate solves that problem in closed form ([`solver`]),
//! certifies the solution by brute force ([`oracle`]), maps it onto a
//! five-treatment lab protocol ([`experiment`]), simulates lab sessions
//! ([`simlab`]) and analyses the resulting giving data ([`analysis`]).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod model;
pub mod oracle;
pub mod simlab;
pub mod solver;

pub use error::{Error, Result};
pub use experiment::{Prediction, PredictionMode, Role, Treatment};
pub use model::{AgentParams, EconomyState, Outcome, UtilityBreakdown};
pub use oracle::GridSpec;
pub use solver::{Region, SolveResult, Thresholds};
