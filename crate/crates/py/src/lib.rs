//! Python bindings. Model types are exposed as frozen classes; results that
//! are plain records come back as dicts.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trendfair::analysis::{
    self, censoring_rate, decrease_tests, filter_social, load_csv, summary_by_treatment, Alternative, SocialFilter,
    WilcoxonOptions,
};
use trendfair::experiment::{self, PredictionMode};
use trendfair::model::{self, AgentParams, EconomyState};
use trendfair::oracle::{self, GridSpec};
use trendfair::simlab::{self, GivingRecord, ParamDistribution, PopulationConfig};
use trendfair::solver;
use trendfair::{Error, Role, Treatment};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn mode(discrete: bool) -> PredictionMode {
    if discrete {
        PredictionMode::Discrete
    } else {
        PredictionMode::Continuous
    }
}

#[pyclass(name = "AgentParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyAgent(AgentParams);

#[pymethods]
impl PyAgent {
    #[new]
    fn new(a: f64, b: f64, eta: f64) -> PyResult<Self> {
        AgentParams::new(a, b, eta).map(Self).map_err(to_py)
    }

    /// Agent with `b = 1` and the given type ratio `a/b`.
    #[staticmethod]
    fn from_ratio(ratio: f64, eta: f64) -> PyResult<Self> {
        AgentParams::from_ratio(ratio, eta).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn selfish(eta: f64) -> PyResult<Self> {
        AgentParams::selfish(eta).map(Self).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta()
    }

    /// `a/b`, or `None` for a selfish agent.
    #[getter]
    fn type_ratio(&self) -> Option<f64> {
        self.0.type_ratio()
    }

    fn __repr__(&self) -> String {
        format!("AgentParams(a={}, b={}, eta={})", self.0.a(), self.0.b(), self.0.eta())
    }
}

#[pyclass(name = "EconomyState", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyEconomy(EconomyState);

#[pymethods]
impl PyEconomy {
    #[new]
    #[pyo3(signature = (w_i, w_j, t_pot, d_i = 0.0, d_j = 0.0))]
    fn new(w_i: f64, w_j: f64, t_pot: f64, d_i: f64, d_j: f64) -> PyResult<Self> {
        EconomyState::new(w_i, w_j, d_i, d_j, t_pot).map(Self).map_err(to_py)
    }

    /// Economy faced by one role in one treatment of the lab protocol.
    #[staticmethod]
    fn for_treatment(treatment: &str, role: &str) -> PyResult<Self> {
        let t: Treatment = treatment.parse().map_err(to_py)?;
        let r: Role = role.parse().map_err(to_py)?;
        Ok(Self(experiment::economy_for(t, r)))
    }

    #[getter]
    fn w_i(&self) -> f64 {
        self.0.w_i()
    }

    #[getter]
    fn w_j(&self) -> f64 {
        self.0.w_j()
    }

    #[getter]
    fn d_i(&self) -> f64 {
        self.0.d_i()
    }

    #[getter]
    fn d_j(&self) -> f64 {
        self.0.d_j()
    }

    #[getter]
    fn t_pot(&self) -> f64 {
        self.0.t_pot()
    }

    fn kink_share(&self) -> f64 {
        self.0.kink_share()
    }

    fn __repr__(&self) -> String {
        let e = &self.0;
        format!(
            "EconomyState(w_i={}, w_j={}, t_pot={}, d_i={}, d_j={})",
            e.w_i(),
            e.w_j(),
            e.t_pot(),
            e.d_i(),
            e.d_j()
        )
    }
}

#[pyclass(name = "Solution", frozen, get_all)]
pub struct PySolution {
    s_star: f64,
    region: &'static str,
    s_unclamped: f64,
    giving: f64,
    h: f64,
    u_bound: f64,
    l_bound: f64,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(s_star={}, region='{}', giving={})", self.s_star, self.region, self.giving)
    }
}

#[pyfunction]
fn solve(agent: PyAgent, econ: PyEconomy) -> PySolution {
    let r = solver::solve(&agent.0, &econ.0);
    PySolution {
        s_star: r.s_star,
        region: r.region.as_str(),
        s_unclamped: r.s_unclamped,
        giving: r.giving,
        h: r.thresholds.h,
        u_bound: r.thresholds.u_bound,
        l_bound: r.thresholds.l_bound,
    }
}

/// Utility components at kept share `s`.
#[pyfunction]
fn dictator_utility<'py>(py: Python<'py>, agent: PyAgent, econ: PyEconomy, s: f64) -> PyResult<Bound<'py, PyDict>> {
    let u = model::dictator_utility(&agent.0, &econ.0, s).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("material", u.material)?;
    d.set_item("trend_loss", u.trend_loss)?;
    d.set_item("income_ineq", u.income_ineq)?;
    d.set_item("trend_ineq", u.trend_ineq)?;
    d.set_item("total", u.total)?;
    Ok(d)
}

/// Brute-force maximizer over `[0, 1]`; returns `(s_best, u_best)`.
#[pyfunction]
#[pyo3(signature = (agent, econ, steps = 10_000, refine_rounds = 3))]
fn grid_argmax(agent: PyAgent, econ: PyEconomy, steps: usize, refine_rounds: usize) -> PyResult<(f64, f64)> {
    let spec = GridSpec::new(steps, refine_rounds).map_err(to_py)?;
    let best = oracle::grid_argmax(&agent.0, &econ.0, spec);
    Ok((best.s_best, best.u_best))
}

/// Best giving on a grid of `tick`; returns `(giving, s, utility)`.
#[pyfunction]
#[pyo3(signature = (agent, econ, tick = 0.1))]
fn discrete_argmax(agent: PyAgent, econ: PyEconomy, tick: f64) -> PyResult<(f64, f64, f64)> {
    let c = oracle::discrete_argmax(&agent.0, &econ.0, tick).map_err(to_py)?;
    Ok((c.giving, c.s, c.utility))
}

fn prediction_dict<'py>(py: Python<'py>, p: &experiment::Prediction) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("treatment", p.treatment.as_str())?;
    d.set_item("role", p.role.as_str())?;
    d.set_item("s_star", p.s_star)?;
    d.set_item("giving", p.giving)?;
    d.set_item("region", p.region.as_str())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (agent, treatment, role, discrete = false))]
fn predict_giving<'py>(
    py: Python<'py>,
    agent: PyAgent,
    treatment: &str,
    role: &str,
    discrete: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let t: Treatment = treatment.parse().map_err(to_py)?;
    let r: Role = role.parse().map_err(to_py)?;
    prediction_dict(py, &experiment::predict(&agent.0, t, r, mode(discrete)))
}

/// Predictions for every treatment and role plus a verdict per hypothesis.
#[pyfunction]
#[pyo3(signature = (agent, discrete = false))]
fn evaluate_hypotheses<'py>(py: Python<'py>, agent: PyAgent, discrete: bool) -> PyResult<Bound<'py, PyDict>> {
    let report = experiment::evaluate_hypotheses(&agent.0, mode(discrete));
    let predictions = report
        .predictions
        .iter()
        .map(|p| prediction_dict(py, p))
        .collect::<PyResult<Vec<_>>>()?;
    let verdicts = PyDict::new(py);
    for v in &report.verdicts {
        verdicts.set_item(v.hypothesis.label, v.verdict.as_str())?;
    }
    let d = PyDict::new(py);
    d.set_item("predictions", predictions)?;
    d.set_item("verdicts", verdicts)?;
    d.set_item("notes", report.notes)?;
    Ok(d)
}

fn wilcoxon_options(
    alternative: &str,
    exact_max_n: usize,
    tie_correction: bool,
    continuity_correction: bool,
) -> PyResult<WilcoxonOptions> {
    let alternative = match alternative {
        "two-sided" => Alternative::TwoSided,
        "greater" => Alternative::Greater,
        "less" => Alternative::Less,
        other => {
            return Err(PyValueError::new_err(format!(
                "alternative must be 'two-sided', 'greater' or 'less', got '{other}'"
            )))
        }
    };
    Ok(WilcoxonOptions {
        alternative,
        exact_max_n,
        tie_correction,
        continuity_correction,
    })
}

/// Paired signed-rank test of `x` against `y`.
#[pyfunction]
#[pyo3(signature = (x, y, alternative = "two-sided", exact_max_n = 25, tie_correction = true, continuity_correction = true))]
fn wilcoxon<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    alternative: &str,
    exact_max_n: usize,
    tie_correction: bool,
    continuity_correction: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = wilcoxon_options(alternative, exact_max_n, tie_correction, continuity_correction)?;
    let r = analysis::wilcoxon_signed_rank(&x, &y, opts).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n_effective", r.n_effective)?;
    d.set_item("w_plus", r.w_plus)?;
    d.set_item("p_value", r.p_value)?;
    d.set_item("method", r.method.as_str())?;
    Ok(d)
}

fn record_dict<'py>(py: Python<'py>, r: &GivingRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("session_id", r.session_id)?;
    d.set_item("subject_id", r.subject_id)?;
    d.set_item("pair_id", r.pair_id)?;
    d.set_item("role", r.role.as_str())?;
    d.set_item("period_index", r.period_index)?;
    d.set_item("treatment", r.treatment.as_str())?;
    d.set_item("wage1", r.wage1)?;
    d.set_item("wage2", r.wage2)?;
    d.set_item("giving", r.giving)?;
    d.set_item("implemented", r.implemented)?;
    Ok(d)
}

/// Simulates one lab session. Distributions use the CLI syntax, e.g. `"2"`,
/// `"1:0.5,4:0.5"` or `"uniform:0:0.9"`. Writes CSV to `out` when given and
/// returns the records as dicts.
#[pyfunction]
#[pyo3(signature = (n_subjects = 294, share_selfish = 0.0, ab = "2", eta = "0.8", noise_sd = 0.0, seed = 1, out = None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    n_subjects: usize,
    share_selfish: f64,
    ab: &str,
    eta: &str,
    noise_sd: f64,
    seed: u64,
    out: Option<std::path::PathBuf>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = PopulationConfig {
        n_subjects,
        share_selfish,
        social_ab: ab.parse::<ParamDistribution>().map_err(to_py)?,
        eta: eta.parse::<ParamDistribution>().map_err(to_py)?,
        decision_noise_sd: noise_sd,
    };
    let records = simlab::simulate(&config, seed).map_err(to_py)?;
    if let Some(path) = out {
        simlab::export_csv(&records, path).map_err(to_py)?;
    }
    records.iter().map(|r| record_dict(py, r)).collect()
}

fn load(path: &std::path::Path, cutoff: Option<f64>) -> PyResult<analysis::Dataset> {
    let data = load_csv(path).map_err(to_py)?;
    match cutoff {
        Some(c) => filter_social(&data, SocialFilter::new(c).map_err(to_py)?).map_err(to_py),
        None => Ok(data),
    }
}

/// Mean, standard deviation and count of giving per treatment and role.
#[pyfunction]
#[pyo3(signature = (path, cutoff = None))]
fn summarize<'py>(py: Python<'py>, path: std::path::PathBuf, cutoff: Option<f64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let summary = summary_by_treatment(&load(&path, cutoff)?).map_err(to_py)?;
    summary
        .cells
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("treatment", c.treatment.as_str())?;
            d.set_item("role", c.role.as_str())?;
            d.set_item("mean", c.mean)?;
            d.set_item("sd", c.sd)?;
            d.set_item("n", c.n)?;
            Ok(d)
        })
        .collect()
}

/// Share of decisions giving exactly nothing.
#[pyfunction]
#[pyo3(signature = (path, cutoff = None))]
fn censoring(path: std::path::PathBuf, cutoff: Option<f64>) -> PyResult<f64> {
    censoring_rate(&load(&path, cutoff)?).map_err(to_py)
}

/// Signed-rank tests of each decreasing treatment against its baselines.
#[pyfunction]
#[pyo3(signature = (path, cutoff = None))]
fn decrease_comparisons<'py>(
    py: Python<'py>,
    path: std::path::PathBuf,
    cutoff: Option<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    decrease_tests(&load(&path, cutoff)?, WilcoxonOptions::default())
        .iter()
        .map(|t| {
            let d = PyDict::new(py);
            d.set_item("group", t.comparison.group.as_str())?;
            d.set_item("decreasing", t.comparison.decreasing.label)?;
            d.set_item("baseline", t.comparison.baseline.label)?;
            d.set_item("n_effective", t.result.n_effective)?;
            d.set_item("w_plus", t.result.w_plus)?;
            d.set_item("p_value", t.result.p_value)?;
            d.set_item("method", t.result.method.as_str())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "trendfair")]
pub fn trendfair_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAgent>()?;
    m.add_class::<PyEconomy>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(dictator_utility, m)?)?;
    m.add_function(wrap_pyfunction!(grid_argmax, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_argmax, m)?)?;
    m.add_function(wrap_pyfunction!(predict_giving, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(censoring, m)?)?;
    m.add_function(wrap_pyfunction!(decrease_comparisons, m)?)?;
    m.add("TREATMENTS", Treatment::ALL.map(|t| t.as_str()).to_vec())?;
    m.add("ROLES", Role::ALL.map(|r| r.as_str()).to_vec())?;
    Ok(())
}
