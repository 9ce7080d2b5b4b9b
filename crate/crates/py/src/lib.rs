//! Python bindings. Reports come back as plain dicts and lists; point sets
//! are wrapped in the `PointSet` class.

use fracdim::bounds::{self, EpsMode};
use fracdim::dimension::{self, EstimateOptions, EstimatorMethod};
use fracdim::energy::{self, KernelChoice};
use fracdim::generators::{self, CantorParams, GeneratorSpec, WeierstrassParams};
use fracdim::repro::{self, Experiment};
use fracdim::{pca as pca_mod, PointFamily, RegionSpec};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable report into native Python objects through JSON.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

/// A finite set of distinct points in R^d.
#[pyclass(name = "PointSet", module = "fracdim", frozen, from_py_object)]
#[derive(Clone)]
struct PyPointSet(fracdim::PointSet);

#[pymethods]
impl PyPointSet {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        fracdim::PointSet::from_rows(&rows).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        fracdim::geometry::load_csv(path).map(Self).map_err(err)
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        fracdim::geometry::save_csv(&self.0, path).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn content_hash(&self) -> String {
        self.0.content_hash()
    }

    fn diameter(&self) -> f64 {
        self.0.diameter()
    }

    fn __repr__(&self) -> String {
        format!("PointSet(n={}, dim={})", self.0.len(), self.0.dim())
    }
}

fn kernel(name: &str) -> PyResult<KernelChoice> {
    match name {
        "auto" => Ok(KernelChoice::Auto),
        "pairwise" => Ok(KernelChoice::Pairwise),
        "product" => Ok(KernelChoice::Product),
        other => Err(err(format!(
            "unknown kernel {other:?}; expected auto, pairwise or product"
        ))),
    }
}

#[pyfunction]
#[pyo3(signature = (m, n, k, kept=None))]
fn cantor(m: usize, n: usize, k: u32, kept: Option<Vec<usize>>) -> PyResult<PyPointSet> {
    let mut p = CantorParams::new(m, n, k);
    p.kept = kept;
    generators::gen_cantor(&p).map(PyPointSet).map_err(err)
}

/// Product of Cantor sets, one `(m, n, k)` triple per axis.
#[pyfunction]
fn cantor_product(factors: Vec<(usize, usize, u32)>) -> PyResult<PyPointSet> {
    let factors: Vec<CantorParams> = factors
        .into_iter()
        .map(|(m, n, k)| CantorParams::new(m, n, k))
        .collect();
    generators::gen_cantor_product(&factors).map(PyPointSet).map_err(err)
}

#[pyfunction]
fn lattice(d: usize, q: usize) -> PyResult<PyPointSet> {
    generators::gen_lattice(d, q).map(PyPointSet).map_err(err)
}

#[pyfunction]
fn adversarial_lattice(d: usize, q: usize, k: usize, m: usize) -> PyResult<PyPointSet> {
    generators::gen_adversarial_lattice(d, q, k, m)
        .map(PyPointSet)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, seed, d, q, terms=None, rescale=true))]
fn weierstrass_graph(
    a: f64,
    b: f64,
    seed: u64,
    d: usize,
    q: usize,
    terms: Option<usize>,
    rescale: bool,
) -> PyResult<PyPointSet> {
    let params = WeierstrassParams::seeded(a, b, seed, terms).map_err(err)?;
    generators::gen_weierstrass_graph(&params, d, q, rescale)
        .map(PyPointSet)
        .map_err(err)
}

/// Generates from a JSON parameter record such as `{"type": "lattice", "d": 2, "q": 8}`.
#[pyfunction]
fn generate(spec_json: &str) -> PyResult<PyPointSet> {
    let spec: GeneratorSpec = serde_json::from_str(spec_json).map_err(err)?;
    spec.generate().map(PyPointSet).map_err(err)
}

#[pyfunction]
fn s_energy<'py>(py: Python<'py>, ps: &PyPointSet, s: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| energy::s_energy(&ps.0, s)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (ps, s_values, kernel_choice="auto"))]
fn s_energy_sweep<'py>(
    py: Python<'py>,
    ps: &PyPointSet,
    s_values: Vec<f64>,
    kernel_choice: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let choice = kernel(kernel_choice)?;
    let r = py
        .detach(|| energy::s_energy_sweep_with(&ps.0, &s_values, choice))
        .map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn count_close_pairs(py: Python<'_>, ps: &PyPointSet, r: f64) -> PyResult<u64> {
    py.detach(|| energy::count_close_pairs(&ps.0, r)).map_err(err)
}

/// Estimates the discrete Hausdorff dimension of a family ordered by size.
#[pyfunction]
#[pyo3(signature = (family, s_min=0.0, s_max=None, step=0.05, threshold=None, method="increment_growth", label="family"))]
#[allow(clippy::too_many_arguments)]
fn estimate_dimension<'py>(
    py: Python<'py>,
    family: Vec<PyPointSet>,
    s_min: f64,
    s_max: Option<f64>,
    step: f64,
    threshold: Option<f64>,
    method: &str,
    label: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let method = match method {
        "increment_growth" => EstimatorMethod::IncrementGrowth,
        "slope_threshold" => EstimatorMethod::SlopeThreshold,
        other => return Err(err(format!("unknown method {other:?}"))),
    };
    let family = PointFamily::new(label, family.into_iter().map(|p| p.0).collect()).map_err(err)?;
    let opts = EstimateOptions {
        s_min,
        s_max,
        step,
        threshold,
        method,
    };
    let est = py
        .detach(|| dimension::estimate_dimension(&family, &opts))
        .map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
fn cantor_product_dimension(factors: Vec<(usize, usize)>) -> PyResult<f64> {
    dimension::cantor_product_dimension(&factors).map_err(err)
}

fn region(json: &str) -> PyResult<RegionSpec> {
    serde_json::from_str(json).map_err(err)
}

/// `eps` is "exact", "auto" or a number given as a string.
#[pyfunction]
#[pyo3(signature = (ps, region_json, s, eps="exact"))]
fn verify_concentration<'py>(
    py: Python<'py>,
    ps: &PyPointSet,
    region_json: &str,
    s: f64,
    eps: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let region = region(region_json)?;
    let mode: EpsMode = eps.parse().map_err(err)?;
    let r = py
        .detach(|| bounds::verify_concentration(&ps.0, &region, s, mode))
        .map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (ps, region_json, s, eps=0.0))]
fn verify_energy_lower_bound<'py>(
    py: Python<'py>,
    ps: &PyPointSet,
    region_json: &str,
    s: f64,
    eps: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let region = region(region_json)?;
    let r = py
        .detach(|| bounds::verify_energy_lower_bound(&ps.0, &region, s, eps))
        .map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn a_constant(s: f64, k: f64) -> PyResult<f64> {
    bounds::a_constant(s, k).map_err(err)
}

#[pyfunction]
fn energy_lower_bound(s: f64, k: f64, c_e: f64, n: usize) -> PyResult<f64> {
    bounds::energy_lower_bound(s, k, c_e, n).map_err(err)
}

#[pyfunction]
fn concentration_bound(s: f64, k: f64, c_e: f64, energy: f64, n: usize) -> PyResult<f64> {
    bounds::concentration_bound(s, k, c_e, energy, n).map_err(err)
}

#[pyfunction]
fn prescribed_epsilon(s: f64, k: f64, c_e: f64, n: usize) -> PyResult<f64> {
    bounds::prescribed_epsilon(s, k, c_e, n).map_err(err)
}

#[pyfunction]
fn pca<'py>(py: Python<'py>, ps: &PyPointSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pca_mod::pca(&ps.0).map_err(err)?)
}

#[pyfunction]
fn pca_compare<'py>(py: Python<'py>, a: &PyPointSet, b: &PyPointSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pca_mod::pca_compare(&a.0, &b.0).map_err(err)?)
}

/// Runs one experiment by id, e.g. "energy-cantor-s0.5".
#[pyfunction]
#[pyo3(signature = (experiment, max_level=None))]
fn run_experiment<'py>(py: Python<'py>, experiment: &str, max_level: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let e: Experiment = experiment.parse().map_err(err)?;
    let report = py.detach(|| repro::run(e, max_level)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
#[pyo3(name = "fracdim")]
fn fracdim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointSet>()?;
    m.add_function(wrap_pyfunction!(cantor, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_product, m)?)?;
    m.add_function(wrap_pyfunction!(lattice, m)?)?;
    m.add_function(wrap_pyfunction!(adversarial_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(weierstrass_graph, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(s_energy, m)?)?;
    m.add_function(wrap_pyfunction!(s_energy_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(count_close_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_product_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(verify_concentration, m)?)?;
    m.add_function(wrap_pyfunction!(verify_energy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(a_constant, m)?)?;
    m.add_function(wrap_pyfunction!(energy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(concentration_bound, m)?)?;
    m.add_function(wrap_pyfunction!(prescribed_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(pca_compare, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
