//! Python module `derham_py`. Results cross the boundary as plain dicts and
//! lists; differential forms travel as their JSON encoding.

use derham::cohomology::representative_basis;
use derham::exterior::{codifferential, d, form_from_json, form_to_json, hodge_star, FormJson};
use derham::harmonics::harmonic_basis;
use derham::kernels::expansion_table;
use derham::spaces::classify_delta;
use derham_cli::{run_suite as run, SuiteConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Weight window of `delta` in dimension `n`.
#[pyfunction]
fn classify<'py>(py: Python<'py>, n: usize, delta: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &classify_delta(n, delta).map_err(value_err)?)
}

/// Orthogonal basis of degree-`k` spherical harmonics; exact values as strings.
#[pyfunction]
fn harmonics<'py>(py: Python<'py>, n: usize, k: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &*harmonic_basis(n, k).map_err(value_err)?)
}

#[pyfunction]
#[pyo3(signature = (n, x, y, max_m = 10))]
fn expansion<'py>(py: Python<'py>, n: usize, x: Vec<f64>, y: Vec<f64>, max_m: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &expansion_table(n, &x, &y, max_m).map_err(value_err)?)
}

#[derive(Serialize)]
struct BasisOut {
    #[serde(flatten)]
    basis: derham::cohomology::CohomologyBasis,
    forms: Vec<FormJson>,
}

/// Cohomology representatives of degree `q_out` up to order `m`.
#[pyfunction]
fn cohomology_basis<'py>(py: Python<'py>, n: usize, q_out: usize, m: u32) -> PyResult<Bound<'py, PyAny>> {
    let basis = py.detach(|| representative_basis(n, q_out, m)).map_err(value_err)?;
    let forms = basis.members.iter().map(FormJson::from_form).collect::<Result<_, _>>().map_err(value_err)?;
    to_py(py, &BasisOut { basis, forms })
}

fn map_form(s: &str, f: impl Fn(&derham::Form) -> derham::Result<derham::Form>) -> PyResult<String> {
    let form = form_from_json(s).map_err(value_err)?;
    form_to_json(&f(&form).map_err(value_err)?).map_err(value_err)
}

/// Exterior derivative of a JSON-encoded form.
#[pyfunction]
fn exterior_d(form: &str) -> PyResult<String> {
    map_form(form, d)
}

#[pyfunction]
fn codiff(form: &str) -> PyResult<String> {
    map_form(form, codifferential)
}

#[pyfunction]
fn star(form: &str) -> PyResult<String> {
    map_form(form, |f| Ok(hodge_star(f)))
}

/// Run the check suite. `config` is `key = value` text; `overrides` win over it.
/// Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (config = None, overrides = None))]
fn run_suite<'py>(
    py: Python<'py>,
    config: Option<&str>,
    overrides: Option<Vec<(String, String)>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SuiteConfig::load(config, std::iter::empty(), &overrides.unwrap_or_default()).map_err(value_err)?;
    let report = py.detach(|| run(&cfg)).map_err(value_err)?;
    to_py(py, &report)
}

#[pymodule]
fn derham_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(harmonics, m)?)?;
    m.add_function(wrap_pyfunction!(expansion, m)?)?;
    m.add_function(wrap_pyfunction!(cohomology_basis, m)?)?;
    m.add_function(wrap_pyfunction!(exterior_d, m)?)?;
    m.add_function(wrap_pyfunction!(codiff, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
