//! Python bindings for `modestab`.
//!
//! Structured results cross the boundary as the same JSON the CLI emits,
//! decoded into Python objects.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use modestab::algebra::interval::{hex_f64, parse_hex_f64};
use modestab::algebra::{parse_crat, parse_rat, CRat};
use modestab::certify::{self as cert, Bounds, CertifyOptions};
use modestab::fuchsian::{fmt_bi, registry};
use modestab::recurrence::{self, derive_recurrence, Classification, Mode, RecurrenceSystem, Values};
use modestab::shooting::{eigen_scan, Rect, ScanOptions, Settings};
use modestab::simcoords::{propagator_check as run_propagator, SuiteOptions};
use modestab::transform::verify_chain;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn crat(s: &str) -> PyResult<CRat> {
    parse_crat(s).map_err(value_err)
}

#[pyclass(module = "pymodestab")]
struct Certificate {
    inner: cert::Certificate,
}

#[pymethods]
impl Certificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Certificate { inner: serde_json::from_str(text).map_err(value_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(runtime_err)
    }

    #[getter]
    fn verdict(&self) -> String {
        self.inner.verdict.to_string()
    }

    #[getter]
    fn problem(&self) -> String {
        self.inner.problem.clone()
    }

    fn is_stable(&self) -> bool {
        self.inner.is_stable()
    }

    /// Raises `ValueError` when the certificate does not reproduce.
    fn recheck<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| cert::recheck(&self.inner)).map_err(value_err)?;
        to_py(py, &r)
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Certificate(problem={:?}, verdict={})", self.inner.problem, self.inner.verdict)
    }
}

/// Run the certification pipeline; bounds are rational strings.
#[pyfunction]
#[pyo3(signature = (problem = "wavemaps-corotational", m_delta = None, m_eps = None, m_c = None, n0 = None))]
fn certify(py: Python<'_>, problem: &str, m_delta: Option<&str>, m_eps: Option<&str>, m_c: Option<&str>, n0: Option<u64>) -> PyResult<Certificate> {
    let d = Bounds::default();
    let pick = |s: Option<&str>, dflt| s.map(|s| parse_rat(s).map_err(value_err)).unwrap_or(Ok(dflt));
    let bounds = Bounds { delta: pick(m_delta, d.delta)?, eps: pick(m_eps, d.eps)?, c: pick(m_c, d.c)? };
    let opts = CertifyOptions { bounds, n0: n0.unwrap_or(CertifyOptions::default().n0), ..Default::default() };
    let problem = problem.to_string();
    let inner = py.detach(move || cert::certify_with(&problem, &opts)).map_err(value_err)?;
    Ok(Certificate { inner })
}

/// The three-term recurrence of a registered problem.
#[pyclass(module = "pymodestab")]
struct Recurrence {
    inner: RecurrenceSystem,
}

#[pymethods]
impl Recurrence {
    #[new]
    #[pyo3(signature = (problem = "wavemaps-corotational"))]
    fn new(problem: &str) -> PyResult<Self> {
        let p = cert::problem(problem).ok_or_else(|| value_err(format!("unknown problem {problem:?}")))?;
        let heun = registry::equation(p.heun).ok_or_else(|| runtime_err("Heun form not registered"))?;
        Ok(Recurrence { inner: derive_recurrence(&heun).map_err(runtime_err)? })
    }

    #[getter]
    fn a(&self) -> String {
        fmt_bi(&self.inner.a, "n")
    }

    #[getter]
    fn b(&self) -> String {
        fmt_bi(&self.inner.b, "n")
    }

    /// `a_0 … a_n` as exact strings.
    fn coefficients(&self, lam: &str, n: usize) -> PyResult<Vec<String>> {
        match recurrence::coefficients(&self.inner, &crat(lam)?, n, Mode::Exact).map_err(value_err)? {
            Values::Exact(v) => Ok(v.iter().map(|c| c.to_string()).collect()),
            Values::Float { .. } => unreachable!("exact mode"),
        }
    }

    fn coefficients_float(&self, lam: &str, n: usize) -> PyResult<Vec<Complex64>> {
        Ok(recurrence::coefficients(&self.inner, &crat(lam)?, n, Mode::Float).map_err(value_err)?.to_c64())
    }

    /// Which limiting root the float ratios `a_{k+1}/a_k` approach.
    fn classify<'py>(&self, py: Python<'py>, lam: &str, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let l = crat(lam)?;
        let roots = recurrence::limiting_roots(&self.inner, &l).ok_or_else(|| value_err("no limiting recurrence"))?;
        let seq = recurrence::ratios(&self.inner, &l, n, Mode::Float).map_err(value_err)?;
        let c: Classification = recurrence::poincare_classify(&seq, roots).map_err(value_err)?;
        to_py(py, &c)
    }
}

/// Shooting mismatch of the spectral equation.
#[pyclass(module = "pymodestab")]
struct Shooter {
    inner: modestab::shooting::Shooter,
}

#[pymethods]
impl Shooter {
    #[new]
    #[pyo3(signature = (rho_m = 0.5))]
    fn new(rho_m: f64) -> PyResult<Self> {
        let s = Settings { rho_m, ..Default::default() };
        Ok(Shooter { inner: modestab::shooting::Shooter::new(s).map_err(value_err)? })
    }

    fn mismatch(&self, lam: Complex64) -> PyResult<Complex64> {
        self.inner.mismatch(lam).map_err(value_err)
    }

    fn normalized_mismatch(&self, lam: Complex64) -> PyResult<f64> {
        self.inner.normalized_mismatch(lam).map_err(value_err)
    }

    #[pyo3(signature = (start, max_iter = 60))]
    fn refine(&self, start: Complex64, max_iter: usize) -> PyResult<Complex64> {
        self.inner.refine(start, max_iter).map_err(value_err)
    }

    /// `(rho, values)` normalized by `f'(0) = 1`.
    #[pyo3(signature = (lam, points = 200, tol = 1e-8))]
    fn eigenfunction(&self, lam: Complex64, points: usize, tol: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
        let e = self.inner.eigenfunction(lam, points, tol).map_err(value_err)?;
        Ok((e.rho, e.values))
    }

    #[pyo3(signature = (re_min = -0.125, re_max = 2.5, im_min = -10.0, im_max = 10.0, min_cell = 0.05))]
    fn scan<'py>(&self, py: Python<'py>, re_min: f64, re_max: f64, im_min: f64, im_max: f64, min_cell: f64) -> PyResult<Bound<'py, PyAny>> {
        let opts = ScanOptions { min_cell, ..Default::default() };
        let rect = Rect::new(re_min, re_max, im_min, im_max);
        let r = py.detach(|| eigen_scan(&self.inner, rect, &opts)).map_err(value_err)?;
        to_py(py, &r)
    }
}

/// Exact verification of the registered transformation chain.
#[pyfunction]
fn transform_chain<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let p = cert::problem("wavemaps-corotational").expect("registered");
    let r = py.detach(|| verify_chain(&p.chain)).map_err(runtime_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (panels = None, order = None))]
fn propagator_check<'py>(py: Python<'py>, panels: Option<usize>, order: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let mut o = SuiteOptions::default();
    if let Some(p) = panels {
        o.resolution.panels = p;
    }
    if let Some(q) = order {
        o.resolution.order = q;
    }
    let r = py.detach(|| run_propagator(&o)).map_err(runtime_err)?;
    to_py(py, &r)
}

#[pyfunction]
fn hex_float(x: f64) -> String {
    hex_f64(x)
}

#[pyfunction]
fn parse_hex_float(s: &str) -> PyResult<f64> {
    parse_hex_f64(s).map_err(value_err)
}

#[pymodule]
fn pymodestab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Certificate>()?;
    m.add_class::<Recurrence>()?;
    m.add_class::<Shooter>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(transform_chain, m)?)?;
    m.add_function(wrap_pyfunction!(propagator_check, m)?)?;
    m.add_function(wrap_pyfunction!(hex_float, m)?)?;
    m.add_function(wrap_pyfunction!(parse_hex_float, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
