//! Python module `multislit`. Wavefunctions cross the boundary as lists of
//! complex samples on a `Grid`; configs cross as JSON text.

use multislit::config::{EigenstateConfig, SimulationConfig};
use multislit::pipeline::{simulate as run_pipeline, sweep as run_sweep, SweepParam};
use multislit::sets::{commutator_norm as commutator, project_momentum as pm, project_position as pp};
use multislit::validate::{run_validation, ValidateOptions};
use multislit::{Error, Grid, IntervalSet, JointEigenstate, PeriodicSet, Region, Set, Space, Wavefunction, C64};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for multislit::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object, module = "multislit")]
#[derive(Clone, Copy)]
struct PyGrid(Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(extent: f64, n_points: usize) -> PyResult<Self> {
        Grid::new(extent, n_points).py().map(PyGrid)
    }

    /// `cells` whole periods with `samples_per_period` samples each.
    #[staticmethod]
    fn periodic(period: f64, cells: usize, samples_per_period: usize) -> PyResult<Self> {
        Grid::periodic(period, cells, samples_per_period).py().map(PyGrid)
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn extent(&self) -> f64 {
        self.0.extent()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn conjugate(&self) -> Self {
        PyGrid(self.0.conjugate())
    }

    fn __repr__(&self) -> String {
        format!("Grid(extent={}, n_points={})", self.0.extent(), self.0.n_points())
    }
}

#[pyclass(name = "PeriodicSet", frozen, skip_from_py_object, module = "multislit")]
#[derive(Clone)]
struct PyPeriodicSet(PeriodicSet);

#[pymethods]
impl PyPeriodicSet {
    /// Copies of `[-half_width, half_width)` centred on `origin + n * period`.
    #[new]
    #[pyo3(signature = (period, half_width, origin = 0.0, n_cells = None))]
    fn new(period: f64, half_width: f64, origin: f64, n_cells: Option<usize>) -> PyResult<Self> {
        PeriodicSet::symmetric(period, half_width, origin, n_cells).py().map(PyPeriodicSet)
    }

    fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }

    fn realize(&self, grid: &PyGrid) -> Vec<bool> {
        self.0.realize(&grid.0).0
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.period()
    }
}

#[pyclass(name = "IntervalSet", frozen, skip_from_py_object, module = "multislit")]
#[derive(Clone)]
struct PyIntervalSet(IntervalSet);

#[pymethods]
impl PyIntervalSet {
    #[new]
    fn new(intervals: Vec<(f64, f64)>) -> PyResult<Self> {
        IntervalSet::new(intervals).py().map(PyIntervalSet)
    }

    fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }

    fn realize(&self, grid: &PyGrid) -> Vec<bool> {
        self.0.realize(&grid.0).0
    }

    fn measure(&self) -> f64 {
        self.0.measure()
    }

    fn complement(&self, lo: f64, hi: f64) -> PyResult<Self> {
        self.0.complement((lo, hi)).py().map(PyIntervalSet)
    }

    fn intervals(&self) -> Vec<(f64, f64)> {
        self.0.intervals().to_vec()
    }
}

fn as_set(obj: &Bound<'_, PyAny>) -> PyResult<Set> {
    if let Ok(s) = obj.extract::<PyRef<'_, PyPeriodicSet>>() {
        return Ok(Set::Periodic(s.0.clone()));
    }
    if let Ok(s) = obj.extract::<PyRef<'_, PyIntervalSet>>() {
        return Ok(Set::Intervals(s.0.clone()));
    }
    Err(PyValueError::new_err("expected a PeriodicSet or IntervalSet"))
}

fn state(grid: &PyGrid, values: Vec<C64>, space: Space) -> PyResult<Wavefunction> {
    Wavefunction::new(grid.0, values, space).py()
}

/// Unitary transform of position samples on `grid`; the result lives on
/// `grid.conjugate()`.
#[pyfunction]
fn fourier(grid: &PyGrid, values: Vec<C64>) -> PyResult<Vec<C64>> {
    Ok(multislit::fourier(&state(grid, values, Space::Position)?).py()?.into_values())
}

/// Inverse of `fourier`: momentum samples on `grid.conjugate()` back to `grid`.
#[pyfunction]
fn inverse_fourier(grid: &PyGrid, values: Vec<C64>) -> PyResult<Vec<C64>> {
    let phi = Wavefunction::new(grid.0.conjugate(), values, Space::Momentum).py()?;
    Ok(multislit::inverse_fourier(&phi).py()?.into_values())
}

#[pyfunction]
fn project_position(grid: &PyGrid, values: Vec<C64>, set: &Bound<'_, PyAny>) -> PyResult<Vec<C64>> {
    Ok(pp(&state(grid, values, Space::Position)?, &as_set(set)?).py()?.into_values())
}

#[pyfunction]
fn project_momentum(grid: &PyGrid, values: Vec<C64>, set: &Bound<'_, PyAny>) -> PyResult<Vec<C64>> {
    Ok(pm(&state(grid, values, Space::Position)?, &as_set(set)?).py()?.into_values())
}

/// `||chi_X(Q) chi_Y(P) psi - chi_Y(P) chi_X(Q) psi||`.
#[pyfunction]
fn commutator_norm(grid: &PyGrid, values: Vec<C64>, x_set: &Bound<'_, PyAny>, y_set: &Bound<'_, PyAny>) -> PyResult<f64> {
    commutator(&as_set(x_set)?, &as_set(y_set)?, &state(grid, values, Space::Position)?).py()
}

#[pyclass(name = "JointEigenstate", frozen, module = "multislit")]
struct PyEigenstate(JointEigenstate);

#[pymethods]
impl PyEigenstate {
    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.psi.grid())
    }

    #[getter]
    fn values(&self) -> Vec<C64> {
        self.0.psi.values().to_vec()
    }

    #[getter]
    fn position_residual(&self) -> f64 {
        self.0.position_residual
    }

    #[getter]
    fn momentum_residual(&self) -> f64 {
        self.0.momentum_residual
    }

    #[getter]
    fn tail_fraction(&self) -> f64 {
        self.0.tail_fraction
    }

    #[getter]
    fn raw_norm_sq(&self) -> f64 {
        self.0.raw_norm_sq
    }

    fn predicted_norm_sq(&self) -> f64 {
        self.0.predicted_norm_sq()
    }

    fn central_pair_mass(&self) -> f64 {
        self.0.central_pair_mass()
    }

    /// `(index, centre, weight)` per copy on the grid.
    fn replicas(&self) -> Vec<(i64, f64, C64)> {
        self.0.replicas.iter().map(|r| (r.index, r.centre, r.weight)).collect()
    }

    fn is_joint_eigenstate(&self, tol: f64) -> bool {
        self.0.is_joint_eigenstate(tol)
    }
}

/// Builds a joint eigenstate from an eigenstate config given as JSON text.
#[pyfunction]
fn eigenstate(config_json: &str) -> PyResult<PyEigenstate> {
    let cfg = EigenstateConfig::from_json(config_json).py()?;
    cfg.build().py().map(PyEigenstate)
}

/// Rectangular slits of width `a` every `t`, cosine momentum window of
/// width `2 pi / t_prime`.
#[pyfunction]
#[pyo3(signature = (a, t, t_prime, cells = 64, samples_per_period = 200))]
fn double_slit_eigenstate(a: f64, t: f64, t_prime: f64, cells: usize, samples_per_period: usize) -> PyResult<PyEigenstate> {
    let text = serde_json::json!({
        "a": a, "T": t, "Tprime": t_prime,
        "numerics": { "cells": cells, "samples_per_period": samples_per_period },
    })
    .to_string();
    eigenstate(&text)
}

/// Runs the interferometer pipeline for a simulation config (JSON text).
/// Returns the report as a dict, with `x` and the three stage densities.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let config = SimulationConfig::from_json(config_json).py()?.resolve().py()?;
    let run = run_pipeline(&config).py()?;
    let r = &run.report;
    let d = PyDict::new(py);
    d.set_item("transmitted", r.transmitted)?;
    d.set_item("blocked", r.blocked)?;
    d.set_item("t_prime", r.t_prime)?;
    d.set_item("wavelength_m", r.wavelength_m)?;
    d.set_item("fresnel_number", r.fresnel_number)?;
    d.set_item("eigenstate_leakage", r.eigenstate_leakage)?;
    let stages = r
        .stages
        .iter()
        .map(|s| {
            let sd = PyDict::new(py);
            sd.set_item("stage", s.stage.to_string())?;
            sd.set_item("probability", s.probability)?;
            sd.set_item("distance", s.distance)?;
            sd.set_item("overlap", s.overlap)?;
            sd.set_item("leakage", s.leakage)?;
            sd.set_item("leakage_total", s.leakage_total)?;
            sd.set_item("peaks", s.peaks.iter().map(|p| (p.centre, p.mass)).collect::<Vec<_>>())?;
            Ok(sd)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("stages", stages)?;
    d.set_item("x", run.prepared.grid().coords())?;
    d.set_item("prepared", run.prepared.densities())?;
    d.set_item("after_grating", run.after_grating.densities())?;
    d.set_item("imaged", run.imaged.densities())?;
    Ok(d)
}

type SweepRow = (f64, f64, f64, f64, f64);

/// `(value, transmitted, leakage, distance, overlap)` per value.
#[pyfunction]
fn sweep(config_json: &str, param: &str, values: Vec<f64>) -> PyResult<Vec<SweepRow>> {
    let config = SimulationConfig::from_json(config_json).py()?.resolve().py()?;
    let param: SweepParam = param.parse().py()?;
    let rows = run_sweep(&config, param, &values).py()?;
    Ok(rows.iter().map(|r| (r.value, r.transmitted, r.leakage, r.distance, r.overlap)).collect())
}

type CheckRow = (String, String, f64, bool);

/// Runs the invariant suite. Returns `(all_passed, [(group, name, value, passed)])`.
#[pyfunction]
#[pyo3(signature = (seed = multislit::validate::DEFAULT_SEED))]
fn validate(seed: u64) -> PyResult<(bool, Vec<CheckRow>)> {
    let report = run_validation(&ValidateOptions::seeded(seed)).py()?;
    let rows = report.checks.iter().map(|c| (c.group.to_string(), c.name.clone(), c.value, c.passed)).collect();
    Ok((report.passed(), rows))
}

#[pymodule]
#[pyo3(name = "multislit")]
fn multislit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPeriodicSet>()?;
    m.add_class::<PyIntervalSet>()?;
    m.add_class::<PyEigenstate>()?;
    m.add_function(wrap_pyfunction!(fourier, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(project_position, m)?)?;
    m.add_function(wrap_pyfunction!(project_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_norm, m)?)?;
    m.add_function(wrap_pyfunction!(eigenstate, m)?)?;
    m.add_function(wrap_pyfunction!(double_slit_eigenstate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
