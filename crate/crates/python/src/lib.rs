//! Python bindings for `cinterp`.

use std::path::PathBuf;

use cinterp::config::DataSpec;
use cinterp::{BoundaryData, CircleGrid, Complex64, HullCertificate, SolverParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: cinterp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(k: usize) -> SolverParams {
    SolverParams::with_k(k)
}

/// Boundary data sampled on an equispaced circle grid.
#[pyclass(name = "BoundaryData", frozen)]
pub struct PyBoundaryData {
    inner: BoundaryData,
}

#[pymethods]
impl PyBoundaryData {
    /// Builds data from a JSON description (`{"kind": ..., "p": ..., "grid_M": ...}`).
    #[staticmethod]
    #[pyo3(signature = (text, base_dir = None))]
    fn from_json(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let spec: DataSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = spec.build(&base_dir.unwrap_or_else(|| PathBuf::from("."))).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// `φ_s(w) = (|w| e^{−u(s)})^p / p` from samples of `u`.
    #[staticmethod]
    fn hilbert_weight(u: Vec<f64>, p: f64) -> PyResult<Self> {
        let grid = CircleGrid::new(u.len()).map_err(py_err)?;
        let inner = BoundaryData::hilbert_weight(&u, p, &grid).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn kind(&self) -> String {
        serde_json::to_value(self.inner.kind()).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }

    /// Boundary sample points.
    fn points(&self) -> Vec<Complex64> {
        self.inner.grid().points().to_vec()
    }

    fn eval(&self, j: usize, w: Complex64) -> PyResult<f64> {
        if j >= self.inner.grid().len() {
            return Err(PyValueError::new_err(format!("sample index {j} out of range")));
        }
        Ok(self.inner.eval(j, w))
    }

    fn eval_dual(&self, j: usize, z: Complex64) -> PyResult<f64> {
        if j >= self.inner.grid().len() {
            return Err(PyValueError::new_err(format!("sample index {j} out of range")));
        }
        Ok(self.inner.eval_dual(j, z))
    }

    fn dual(&self) -> Self {
        Self { inner: self.inner.dual() }
    }
}

#[pyclass(name = "HullCertificate", frozen, get_all)]
pub struct PyCertificate {
    value: f64,
    error_bar: f64,
    lower: f64,
    upper: f64,
    gap: f64,
    converged: bool,
    f_opt: Vec<Complex64>,
    g_opt: Vec<Complex64>,
}

impl From<HullCertificate> for PyCertificate {
    fn from(c: HullCertificate) -> Self {
        Self {
            value: c.value(),
            error_bar: c.error_bar(),
            lower: c.lower,
            upper: c.upper,
            gap: c.gap,
            converged: c.converged(),
            f_opt: c.f_opt.coeffs().to_vec(),
            g_opt: c.g_opt.coeffs().to_vec(),
        }
    }
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!("HullCertificate(value={}, gap={:e})", self.value, self.gap)
    }
}

/// Hull certificate for the interpolant at `(t, w)`.
#[pyfunction]
#[pyo3(signature = (data, t, w, k = 16))]
fn interpolate(data: &PyBoundaryData, t: Complex64, w: Complex64, k: usize) -> PyResult<PyCertificate> {
    cinterp::interpolate(&data.inner, t, w, &params(k)).map(Into::into).map_err(py_err)
}

type LeafRow = (Complex64, Complex64, f64, f64, f64);

/// Leaf through `(t0, w0)`: `(t, F(t), value, poisson, residual)` per test point.
#[pyfunction]
#[pyo3(signature = (data, t0, w0, test_points, k = 16))]
fn leaf(
    data: &PyBoundaryData,
    t0: Complex64,
    w0: Complex64,
    test_points: Vec<Complex64>,
    k: usize,
) -> PyResult<Vec<LeafRow>> {
    let report = cinterp::leaf(&data.inner, t0, w0, &params(k), &test_points).map_err(py_err)?;
    Ok(report.samples.iter().map(|s| (s.t, s.f, s.value, s.poisson, s.residual)).collect())
}

/// Closed-form interpolant of Hilbert-weight data.
#[pyfunction]
fn hilbert_oracle(u: Vec<f64>, p: f64, t: Complex64, w: Complex64) -> PyResult<f64> {
    let grid = CircleGrid::new(u.len()).map_err(py_err)?;
    cinterp::hilbert_oracle(&u, &grid, p, t, w).map_err(py_err)
}

/// Poisson extension of boundary samples to `t`.
#[pyfunction]
fn poisson_extend(h: Vec<f64>, t: Complex64) -> PyResult<f64> {
    let grid = CircleGrid::new(h.len()).map_err(py_err)?;
    cinterp::poisson_extend(&h, &grid, t).map_err(py_err)
}

/// Runs the command-line driver and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    cinterp::cli::run(std::iter::once("cinterp".to_owned()).chain(args))
}

#[pymodule]
fn pycinterp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBoundaryData>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(leaf, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_extend, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
