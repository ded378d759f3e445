//! Python bindings: sets, periodic points, strategies, the prefix-code
//! builder and a generic entry point that runs any CLI subcommand.

use std::collections::BTreeMap;

use opencover::cli::{self, Job, Params};
use opencover::martingale::{winning_set, Strategy as Martingale};
use opencover::space::rational::{format, parse};
use opencover::{BitString, PeriodicPoint as Point, PrefixFreeSet as Set};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: opencover::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {}", e.name(), e))
}

fn bits(s: &str) -> PyResult<BitString> {
    s.parse::<BitString>().map_err(err)
}

fn strings(set: &Set) -> Vec<String> {
    set.iter().map(|s| s.to_string()).collect()
}

#[pyclass(name = "PrefixFreeSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySet(Set);

#[pymethods]
impl PySet {
    #[new]
    fn new(elements: Vec<String>) -> PyResult<Self> {
        let bs = elements.iter().map(|s| bits(s)).collect::<PyResult<Vec<_>>>()?;
        Set::new(bs).map(PySet).map_err(err)
    }

    /// Drops every string that extends another one.
    #[staticmethod]
    fn reduce(elements: Vec<String>) -> PyResult<Self> {
        let bs = elements.iter().map(|s| bits(s)).collect::<PyResult<Vec<_>>>()?;
        Ok(PySet(Set::reduce(bs)))
    }

    fn elements(&self) -> Vec<String> {
        strings(&self.0)
    }

    fn measure(&self) -> String {
        format(&self.0.measure())
    }

    fn conditional_measure(&self, sigma: &str) -> PyResult<String> {
        Ok(format(&self.0.conditional_measure(&bits(sigma)?)))
    }

    fn condition(&self, sigma: &str) -> PyResult<Self> {
        Ok(PySet(self.0.condition(&bits(sigma)?)))
    }

    fn power(&self, n: usize) -> PyResult<Self> {
        self.0.power(n).map(PySet).map_err(err)
    }

    fn union(&self, other: &PySet) -> Self {
        PySet(self.0.union(&other.0))
    }

    fn covers(&self, other: &PySet) -> bool {
        self.0.covers(&other.0)
    }

    fn contains_point(&self, x: &PyPoint) -> bool {
        self.0.member(&x.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("PrefixFreeSet({:?})", strings(&self.0))
    }
}

#[pyclass(name = "PeriodicPoint", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPoint(Point);

#[pymethods]
impl PyPoint {
    #[new]
    fn new(head: &str, period: &str) -> PyResult<Self> {
        Point::new(bits(head)?, bits(period)?).map(PyPoint).map_err(err)
    }

    fn prefix(&self, n: usize) -> String {
        self.0.prefix(n).to_string()
    }

    fn tails(&self) -> Vec<String> {
        self.0.tails().iter().map(|t| t.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!("PeriodicPoint({})", self.0)
    }
}

#[pyclass(name = "Strategy", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStrategy(Martingale);

#[pymethods]
impl PyStrategy {
    /// Parses the JSON form, e.g. `{"kind": "doubler"}`.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        serde_json::from_str(json).map(PyStrategy).map_err(|e| PyValueError::new_err(format!("ParseError: {e}")))
    }

    fn value(&self, s: &str) -> PyResult<String> {
        self.0.value(&bits(s)?).map(|v| format(&v)).map_err(err)
    }

    fn is_normed(&self) -> PyResult<bool> {
        self.0.is_normed().map_err(err)
    }

    /// Minimal strings where capital first reaches `q`, searched to `depth`.
    fn winning_set(&self, q: &str, depth: usize) -> PyResult<PySet> {
        let q = parse(q).map_err(err)?;
        winning_set(&self.0, &q, depth).map(|w| PySet(w.generators)).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("strategies always serialize")
    }

    fn __repr__(&self) -> String {
        format!("Strategy({})", self.to_json())
    }
}

/// Assigns codewords of the requested lengths; returns codeword -> target.
#[pyfunction]
fn kc_build(requests: Vec<(usize, String)>) -> PyResult<BTreeMap<String, String>> {
    let m = opencover::coder::kc_build(&requests).map_err(err)?;
    Ok(m.table().iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

/// Runs a CLI subcommand on a JSON input and returns `(report_json, passed)`.
/// Operation errors come back as an error report with `passed = False`.
#[pyfunction]
#[pyo3(signature = (subcommand, input_json = "{}", case = None, depth = None, stages = None, q = None, k = None, c = None, cap = None, decimal = false))]
#[allow(clippy::too_many_arguments)]
fn run_job(
    subcommand: &str,
    input_json: &str,
    case: Option<String>,
    depth: Option<usize>,
    stages: Option<usize>,
    q: Option<String>,
    k: Option<usize>,
    c: Option<usize>,
    cap: Option<usize>,
    decimal: bool,
) -> PyResult<(String, bool)> {
    let input = serde_json::from_str(input_json).map_err(|e| PyValueError::new_err(format!("ParseError: {e}")))?;
    let job = Job {
        subcommand: subcommand.to_string(),
        input,
        params: Params { case, depth, stages, q, k, c, cap, decimal },
    };
    Ok(match cli::dispatch(&job) {
        Ok(r) => (r.render(), r.pass),
        Err(e) => (cli::render(&cli::error_document(&job, &e)), false),
    })
}

#[pymodule]
#[pyo3(name = "opencover")]
fn opencover_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySet>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyStrategy>()?;
    m.add_function(wrap_pyfunction!(kc_build, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}
