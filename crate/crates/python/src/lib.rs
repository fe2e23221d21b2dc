//! Python bindings: posets, extensions, matrices, spectra, mixing and sampling.
//!
//! Structured reports cross the boundary as plain dicts and lists.

use linext::{BurnIn, ChainSpec, ExtensionSet, LinearExtension, Poset as CorePoset};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: linext::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable value into Python objects via the `json` module.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn chain_spec(name: &str) -> PyResult<ChainSpec> {
    name.parse().map_err(err)
}

fn extension(word: Vec<usize>) -> PyResult<LinearExtension> {
    LinearExtension::new(word).map_err(err)
}

/// A finite poset on the labels 1..=n.
#[pyclass(name = "Poset", module = "linext", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Poset {
    inner: CorePoset,
}

#[pymethods]
impl Poset {
    /// Build from cover (or any generating) relations `(a, b)` meaning `a < b`.
    #[new]
    #[pyo3(signature = (n, covers = Vec::new()))]
    fn new(n: usize, covers: Vec<(usize, usize)>) -> PyResult<Self> {
        CorePoset::from_covers(n, &covers)
            .map(|inner| Poset { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CorePoset::parse_json(text)
            .map(|inner| Poset { inner })
            .map_err(err)
    }

    /// `antichain:n`, `chain:n`, `nshape:n,k` or `sumchains:a,b,...`.
    #[staticmethod]
    fn family(spec: &str) -> PyResult<Self> {
        linext::family_poset(spec)
            .map(|inner| Poset { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        CorePoset::random(n, seed)
            .map(|inner| Poset { inner })
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.size()
    }

    fn covers(&self) -> Vec<(usize, usize)> {
        self.inner.covers().0
    }

    fn relations(&self) -> Vec<(usize, usize)> {
        self.inner.relations()
    }

    fn less(&self, a: usize, b: usize) -> bool {
        a >= 1
            && b >= 1
            && a <= self.inner.size()
            && b <= self.inner.size()
            && self.inner.less(a, b)
    }

    fn is_chain(&self) -> bool {
        self.inner.is_chain()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn dual(&self) -> Poset {
        Poset {
            inner: self.inner.dual(),
        }
    }

    fn canonical_form(&self) -> Vec<(usize, usize)> {
        linext::canonical_form(&self.inner).0
    }

    /// All linear extensions in lexicographic order.
    fn linear_extensions(&self) -> Vec<Vec<usize>> {
        ExtensionSet::enumerate(&self.inner)
            .iter()
            .map(|w| w.0)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Poset({}, {:?})", self.inner.size(), self.inner.covers().0)
    }
}

/// `word . tau_i` (positions are 1-based).
#[pyfunction]
fn apply_tau(p: &Poset, word: Vec<usize>, i: usize) -> PyResult<Vec<usize>> {
    linext::apply_tau(&p.inner, &extension(word)?, i)
        .map(|w| w.0)
        .map_err(err)
}

/// `word . T_{i,j}`: move the entry at position i to position j.
#[pyfunction]
fn apply_t(p: &Poset, word: Vec<usize>, i: usize, j: usize) -> PyResult<Vec<usize>> {
    linext::apply_t(&p.inner, &extension(word)?, i, j)
        .map(|w| w.0)
        .map_err(err)
}

/// Exact transition matrix as `{"rows", "den", "num"}` with integer numerators.
#[pyfunction]
#[pyo3(signature = (p, chain = "r2r"))]
fn transition_matrix<'py>(py: Python<'py>, p: &Poset, chain: &str) -> PyResult<Bound<'py, PyAny>> {
    #[derive(Serialize)]
    struct Out {
        rows: Vec<Vec<usize>>,
        den: i64,
        num: Vec<Vec<i64>>,
    }
    let ext = ExtensionSet::enumerate(&p.inner);
    let m = linext::build_matrix(&p.inner, &ext, chain_spec(chain)?).to_json();
    to_py(
        py,
        &Out {
            rows: ext.iter().map(|w| w.0).collect(),
            den: m.den,
            num: m.num,
        },
    )
}

/// Spectrum of the random-to-random matrix and its verdict against the bound.
#[pyfunction]
#[pyo3(signature = (p, tol = 1e-9))]
fn conjecture_check<'py>(py: Python<'py>, p: &Poset, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &linext::conjecture_check(&p.inner, tol).map_err(err)?)
}

/// The bound `(n + 1)(n - 2) / n^2` as a `(numerator, denominator)` pair.
#[pyfunction]
fn conjectured_bound(n: usize) -> (i64, i64) {
    let r = linext::conjectured_bound(n);
    (*r.numer(), *r.denom())
}

#[pyfunction]
#[pyo3(signature = (p, chain = "r2r", epsilon = 0.1))]
fn mixing_report<'py>(
    py: Python<'py>,
    p: &Poset,
    chain: &str,
    epsilon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &linext::mixing_report(&p.inner, chain_spec(chain)?, epsilon).map_err(err)?,
    )
}

#[pyfunction]
fn diameter(p: &Poset) -> usize {
    linext::diameter(&p.inner)
}

/// Independent chains from the least extension; `burn_in=None` uses the default schedule.
#[pyfunction]
#[pyo3(signature = (p, count, seed, burn_in = None))]
fn sample_extensions(
    py: Python<'_>,
    p: &Poset,
    count: usize,
    seed: u64,
    burn_in: Option<usize>,
) -> PyResult<Vec<Vec<usize>>> {
    let mode = burn_in.map(BurnIn::Steps).unwrap_or_default();
    let poset = &p.inner;
    let samples = py.detach(|| linext::sample_extensions(poset, count, mode, seed));
    samples
        .map(|v| v.into_iter().map(|w| w.0).collect())
        .map_err(err)
}

#[pyfunction]
fn nshape_certificate<'py>(py: Python<'py>, n: usize, k: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &linext::nshape_rank_one_certificate(n, k).map_err(err)?)
}

/// Summary of the survey over all non-chain classes up to `n_max`.
#[pyfunction]
#[pyo3(signature = (n_max, tol = 1e-9))]
fn verify_all<'py>(py: Python<'py>, n_max: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &linext::verify_all(n_max, tol).map_err(err)?.summary)
}

#[pyfunction]
fn enumerate_posets(n: usize) -> PyResult<Vec<Poset>> {
    if n == 0 || n > 7 {
        return Err(PyValueError::new_err("n must be in 1..=7"));
    }
    Ok(linext::enumerate_posets(n)
        .into_iter()
        .map(|inner| Poset { inner })
        .collect())
}

#[pymodule]
#[pyo3(name = "linext")]
fn linext_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", linext::VERSION)?;
    m.add_class::<Poset>()?;
    m.add_function(wrap_pyfunction!(apply_tau, m)?)?;
    m.add_function(wrap_pyfunction!(apply_t, m)?)?;
    m.add_function(wrap_pyfunction!(transition_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture_check, m)?)?;
    m.add_function(wrap_pyfunction!(conjectured_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_report, m)?)?;
    m.add_function(wrap_pyfunction!(diameter, m)?)?;
    m.add_function(wrap_pyfunction!(sample_extensions, m)?)?;
    m.add_function(wrap_pyfunction!(nshape_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_posets, m)?)?;
    Ok(())
}
