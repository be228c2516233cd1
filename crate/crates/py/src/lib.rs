//! Python bindings. Pairs are passed as two integers `a, b`; results come back
//! as floats, ints, tuples and dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::divisor2d as core;
use core::constants::Route;
use core::lattice::Params;

create_exception!(
    divisor2d,
    GuardError,
    PyRuntimeError,
    "A tractability cap or precision requirement was exceeded."
);

fn py_err(e: core::Error) -> PyErr {
    if e.is_guard() {
        GuardError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn params(a: u32, b: u32) -> PyResult<Params> {
    Params::new(a, b).map_err(py_err)
}

fn route(name: &str) -> PyResult<Route> {
    match name {
        "direct" => Ok(Route::Direct),
        "euler" | "euler_product" => Ok(Route::EulerProduct),
        _ => Err(PyValueError::new_err(format!("unknown route {name:?}"))),
    }
}

/// Number of pairs (h, r) with h^a r^b = n.
#[pyfunction]
fn d_ab(n: u64, a: u32, b: u32) -> PyResult<u32> {
    Ok(core::lattice::d_ab(n, params(a, b)?))
}

/// Exact count of pairs (h, r) with h^a r^b ≤ x.
#[pyfunction]
fn summatory_exact(x: f64, a: u32, b: u32) -> PyResult<u128> {
    core::summatory_exact(x, params(a, b)?).map_err(py_err)
}

#[pyfunction]
fn main_term(x: f64, a: u32, b: u32) -> PyResult<f64> {
    core::main_term(x, params(a, b)?).map_err(py_err)
}

/// `(D(x), main(x), Δ(x))`.
#[pyfunction]
fn delta(x: f64, a: u32, b: u32) -> PyResult<(u128, f64, f64)> {
    let s = core::delta(x, params(a, b)?).map_err(py_err)?;
    Ok((s.summatory, s.main, s.delta))
}

#[pyfunction]
fn zeta(s: f64) -> PyResult<f64> {
    core::zeta(s).map(|z| z.value).map_err(py_err)
}

/// Nonzero coefficients `[(n, g(n)), ...]` for n ≤ n_max.
#[pyfunction]
fn g_table(n_max: u64, a: u32, b: u32) -> PyResult<Vec<(u64, f64)>> {
    let t = core::voronoi::g_table(n_max, params(a, b)?).map_err(py_err)?;
    Ok(t.nonzero().collect())
}

#[pyfunction]
#[pyo3(signature = (x, z, a, b, phase_precision = 15))]
fn voronoi_truncated(x: f64, z: f64, a: u32, b: u32, phase_precision: u32) -> PyResult<f64> {
    let cfg = core::voronoi::VoronoiConfig::with_precision(z, phase_precision).map_err(py_err)?;
    core::voronoi::voronoi_truncated(x, cfg, params(a, b)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, z, a, b, phase_precision = 15))]
fn voronoi_residual(x: f64, z: f64, a: u32, b: u32, phase_precision: u32) -> PyResult<f64> {
    let cfg = core::voronoi::VoronoiConfig::with_precision(z, phase_precision).map_err(py_err)?;
    core::voronoi::voronoi_residual(x, cfg, params(a, b)?).map_err(py_err)
}

fn estimate_dict<'py>(
    py: Python<'py>,
    e: &core::constants::SeriesEstimate,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", e.value)?;
    d.set_item("error_bound", e.truncation_error_bound)?;
    d.set_item("route", e.route.to_string())?;
    d.set_item("a", e.params.a())?;
    d.set_item("b", e.params.b())?;
    Ok(d)
}

/// Σ g(n)² with a certified truncation bound.
#[pyfunction]
#[pyo3(signature = (a, b, route = "euler", truncation = None))]
fn sum_g_squared<'py>(
    py: Python<'py>,
    a: u32,
    b: u32,
    route: &str,
    truncation: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = self::route(route)?;
    let n = truncation.unwrap_or_else(|| core::constants::default_truncation(r));
    let e = core::constants::sum_g_squared(params(a, b)?, r, n).map_err(py_err)?;
    estimate_dict(py, &e)
}

/// The mean-square constant c_{a,b}.
#[pyfunction]
#[pyo3(signature = (a, b, route = "euler", truncation = None))]
fn c_ab<'py>(
    py: Python<'py>,
    a: u32,
    b: u32,
    route: &str,
    truncation: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = self::route(route)?;
    let n = truncation.unwrap_or_else(|| core::constants::default_truncation(r));
    let e = core::constants::c_ab(params(a, b)?, r, n).map_err(py_err)?;
    estimate_dict(py, &e)
}

/// Exact ∫_{t0}^{t1} Δ² with its normalization against c_{a,b}.
#[pyfunction]
fn mean_square_exact<'py>(
    py: Python<'py>,
    t0: f64,
    t1: f64,
    a: u32,
    b: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params(a, b)?;
    let r = py
        .detach(|| core::meansq::mean_square_exact(t0, t1, p))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("T0", r.t0)?;
    d.set_item("T1", r.t1)?;
    d.set_item("integral", r.integral)?;
    d.set_item("normalized_ratio", r.normalized_ratio)?;
    d.set_item("predicted", r.predicted)?;
    d.set_item("segments", r.segments)?;
    Ok(d)
}

/// `(T, integral, ratio, predicted, relative_gap)`.
type ScanRow = (f64, f64, f64, f64, f64);

/// One row per T, for ascending T.
#[pyfunction]
fn ratio_scan(py: Python<'_>, ts: Vec<f64>, a: u32, b: u32) -> PyResult<Vec<ScanRow>> {
    let p = params(a, b)?;
    let rows = py
        .detach(|| core::meansq::ratio_scan(&ts, p))
        .map_err(py_err)?;
    Ok(rows
        .iter()
        .map(|r| (r.t, r.integral, r.ratio, r.predicted, r.relative_gap))
        .collect())
}

fn dioph_box(
    h1: f64,
    h2: f64,
    r1: f64,
    r2: f64,
    delta: f64,
    a: u32,
    b: u32,
) -> PyResult<core::dioph::DiophBox> {
    core::dioph::DiophBox::for_pair(h1, h2, r1, r2, delta, params(a, b)?).map_err(py_err)
}

/// `(count, ambiguous)` for the box with exponents a/(a+b), b/(a+b).
#[pyfunction]
fn count_solutions(
    h1: f64,
    h2: f64,
    r1: f64,
    r2: f64,
    delta: f64,
    a: u32,
    b: u32,
) -> PyResult<(u64, u64)> {
    let c =
        core::dioph::count_solutions(&dioph_box(h1, h2, r1, r2, delta, a, b)?).map_err(py_err)?;
    Ok((c.count, c.ambiguous))
}

#[pyfunction]
fn spacing_bound(h1: f64, h2: f64, r1: f64, r2: f64, delta: f64, a: u32, b: u32) -> PyResult<f64> {
    Ok(core::dioph::spacing_bound(&dioph_box(
        h1, h2, r1, r2, delta, a, b,
    )?))
}

#[pyfunction]
fn s_ab_truncated(t: f64, cap: f64, a: u32, b: u32) -> PyResult<f64> {
    core::dioph::s_ab_truncated(t, cap, params(a, b)?).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "divisor2d")]
fn divisor2d_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardError", m.py().get_type::<GuardError>())?;
    m.add_function(wrap_pyfunction!(d_ab, m)?)?;
    m.add_function(wrap_pyfunction!(summatory_exact, m)?)?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(g_table, m)?)?;
    m.add_function(wrap_pyfunction!(voronoi_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(voronoi_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sum_g_squared, m)?)?;
    m.add_function(wrap_pyfunction!(c_ab, m)?)?;
    m.add_function(wrap_pyfunction!(mean_square_exact, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_scan, m)?)?;
    m.add_function(wrap_pyfunction!(count_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(spacing_bound, m)?)?;
    m.add_function(wrap_pyfunction!(s_ab_truncated, m)?)?;
    Ok(())
}
