use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module<F: FnOnce(&Bound<'_, PyModule>) -> PyResult<()>>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "trendfair").unwrap();
        trendfair_py::trendfair_module(&m).unwrap();
        f(&m).unwrap();
    });
}

#[test]
fn solve_through_python_objects() {
    with_module(|m| {
        let agent = m.getattr("AgentParams")?.call1((2.0, 1.0, 0.8))?;
        let econ = m.getattr("EconomyState")?.call1((12.0, 10.0, 11.0, 0.0, 3.0))?;
        let sol = m.getattr("solve")?.call1((&agent, &econ))?;
        let s: f64 = sol.getattr("s_star")?.extract()?;
        assert!((s - (0.5 + 3.0 / 44.0)).abs() < 1e-12);
        let region: String = sol.getattr("region")?.extract()?;
        assert_eq!(region, "upper-interior");
        Ok(())
    });
}

#[test]
fn invalid_parameters_raise_value_error() {
    with_module(|m| {
        let err = m.getattr("AgentParams")?.call1((2.0, 1.0, 1.0)).unwrap_err();
        Python::attach(|py| assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py)));
        let err = m.getattr("summarize")?.call1(("/nonexistent/trendfair.csv",)).unwrap_err();
        Python::attach(|py| assert!(err.is_instance_of::<pyo3::exceptions::PyOSError>(py)));
        Ok(())
    });
}

#[test]
fn hypotheses_report_as_dicts() {
    with_module(|m| {
        let agent = m.getattr("AgentParams")?.getattr("from_ratio")?.call1((2.0, 0.8))?;
        let report = m.getattr("evaluate_hypotheses")?.call1((agent,))?;
        let verdicts = report.get_item("verdicts")?.cast_into::<PyDict>()?;
        assert_eq!(verdicts.len(), 4);
        for (_, v) in verdicts.iter() {
            assert_eq!(v.extract::<String>()?, "holds");
        }
        Ok(())
    });
}

#[test]
fn wilcoxon_exact_p_value() {
    with_module(|m| {
        let r = m.getattr("wilcoxon")?.call1((vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0; 5]))?;
        let p: f64 = r.get_item("p_value")?.extract()?;
        assert!((p - 0.0625).abs() < 1e-12);
        Ok(())
    });
}
