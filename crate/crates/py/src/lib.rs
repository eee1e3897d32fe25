//! Python bindings. Vectors cross the boundary as lists of floats in the
//! component-block layout; matrices as lists of columns.

use hkreduce::level::{retract, split_tangent, DEFAULT_MAX_ITER, DEFAULT_RETRACT_TOL};
use hkreduce::lie::{check_ad_invariance, Flavor, SplitSpec};
use hkreduce::linalg::columns;
use hkreduce::quat::{embed_real, QuatMatrix};
use hkreduce::scene;
use hkreduce::submersion::{self, FdOptions};
use hkreduce::verify::{self, VerifyConfig};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: hkreduce::Error) -> PyErr {
    match e {
        hkreduce::Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vector(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn list(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn column_lists(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    columns(m).iter().map(list).collect()
}

fn row_major(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

/// Torus action on flat ℍ^m with a chosen moment-map level.
#[pyclass(name = "Scenario", module = "hkreduce_py", frozen)]
struct PyScenario {
    inner: scene::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Generators as `(a, b, c, d)` row-major real component matrices.
    #[new]
    fn new(name: String, m: usize, generators: Vec<[Vec<Vec<f64>>; 4]>, level: Vec<[f64; 3]>) -> PyResult<Self> {
        let gens = generators
            .iter()
            .map(|[a, b, c, d]| QuatMatrix::new(row_major(a)?, row_major(b)?, row_major(c)?, row_major(d)?).map_err(to_py))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: scene::Scenario::new(name, m, gens, level).map_err(to_py)? })
    }

    #[staticmethod]
    fn weighted(name: String, m: usize, weights: Vec<Vec<f64>>, level: Vec<[f64; 3]>) -> PyResult<Self> {
        Ok(Self { inner: scene::Scenario::weighted(name, m, &weights, level).map_err(to_py)? })
    }

    #[staticmethod]
    fn eguchi_hanson(level: [f64; 3]) -> Self {
        Self { inner: scene::Scenario::eguchi_hanson(level) }
    }

    #[staticmethod]
    fn torus_sp3(level: [[f64; 3]; 2]) -> Self {
        Self { inner: scene::Scenario::torus_sp3(level) }
    }

    #[staticmethod]
    fn trivial(m: usize) -> PyResult<Self> {
        Ok(Self { inner: scene::Scenario::trivial(m).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_config(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self { inner: VerifyConfig::load(&path).map_err(to_py)?.scenario })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `μ(x)` as one `[I, J, K]` triple per generator.
    fn moment_map(&self, x: Vec<f64>) -> PyResult<Vec<[f64; 3]>> {
        Ok(self.inner.moment_map(&vector(x)).map_err(to_py)?.triples())
    }

    fn level_residual(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.level_residual(&vector(x)).map_err(to_py)
    }

    fn fundamental_field(&self, coeffs: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(list(&self.inner.fundamental_field(&coeffs, &vector(x)).map_err(to_py)?))
    }

    fn metric(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        self.inner.metric(&vector(u), &vector(v)).map_err(to_py)
    }

    /// Newton retraction onto the level set: `(point, iterations)`.
    #[pyo3(signature = (y, tol = DEFAULT_RETRACT_TOL, max_iter = DEFAULT_MAX_ITER))]
    fn retract(&self, y: Vec<f64>, tol: f64, max_iter: usize) -> PyResult<(Vec<f64>, usize)> {
        let r = retract(&self.inner, &vector(y), tol, max_iter).map_err(to_py)?;
        Ok((list(&r.point.x), r.iterations))
    }

    /// Orthonormal bases `(horizontal, vertical, normal)` as lists of columns.
    #[pyo3(signature = (x, tol = 1e-9))]
    fn split(&self, x: Vec<f64>, tol: f64) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let s = split_tangent(&self.inner, &vector(x), tol).map_err(to_py)?;
        Ok((column_lists(&s.basis_h), column_lists(&s.basis_v), column_lists(&s.basis_n)))
    }

    fn second_fundamental_form(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(list(&submersion::second_fundamental_form(&self.inner, &vector(x), &vector(u), &vector(v)).map_err(to_py)?.vector))
    }

    /// O'Neill tensors `(A_u v, T_u v)`.
    #[pyo3(signature = (x, u, v, step = submersion::DEFAULT_FD_STEP))]
    fn oneill(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>, step: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let o = submersion::oneill_tensors(&self.inner, &vector(x), &vector(u), &vector(v), &FdOptions::with_step(step)).map_err(to_py)?;
        Ok((list(&o.a), list(&o.t)))
    }

    #[pyo3(signature = (x, u, v, step = submersion::DEFAULT_FD_STEP))]
    fn curvature(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>, step: f64) -> PyResult<Vec<f64>> {
        let r = submersion::submersion_curvature(&self.inner, &vector(x), &vector(u), &vector(v), &FdOptions::with_step(step)).map_err(to_py)?;
        Ok(list(&r.vector))
    }

    #[pyo3(signature = (x, xi, u, step = submersion::DEFAULT_FD_STEP))]
    fn weingarten(&self, x: Vec<f64>, xi: Vec<f64>, u: Vec<f64>, step: f64) -> PyResult<Vec<f64>> {
        let w = submersion::weingarten_fiber(&self.inner, &vector(x), &vector(xi), &vector(u), &FdOptions::with_step(step)).map_err(to_py)?;
        Ok(list(&w))
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, m={}, k={})", self.inner.name(), self.inner.m(), self.inner.k())
    }
}

/// Real 4m×4m embedding of a quaternionic matrix given by row-major components.
#[pyfunction]
fn embed(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, c: Vec<Vec<f64>>, d: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let q = QuatMatrix::new(row_major(&a)?, row_major(&b)?, row_major(&c)?, row_major(&d)?).map_err(to_py)?;
    let r = embed_real(&q).map_err(to_py)?;
    Ok(r.row_iter().map(|row| row.iter().copied().collect()).collect())
}

/// Largest Ad-invariance defect of the reductive complement; `flavor` is
/// `"so"` or `"sp"`.
#[pyfunction]
#[pyo3(signature = (n, k, flavor, samples = 100, seed = 0))]
fn ad_invariance_defect(n: usize, k: usize, flavor: &str, samples: usize, seed: u64) -> PyResult<f64> {
    let flavor = match flavor {
        "so" => Flavor::RealSo,
        "sp" => Flavor::QuatSp,
        other => return Err(PyValueError::new_err(format!("unknown flavor {other:?}"))),
    };
    check_ad_invariance(&SplitSpec::new(n, k, flavor), samples, seed).map_err(to_py)
}

/// Runs the identity suite for a TOML config; returns `(exit_code, json_report)`.
#[pyfunction]
#[pyo3(signature = (config, points = None, seed = None))]
fn verify_config(py: Python<'_>, config: std::path::PathBuf, points: Option<usize>, seed: Option<u64>) -> PyResult<(i32, String)> {
    let mut cfg = VerifyConfig::load(&config).map_err(to_py)?;
    if let Some(p) = points {
        cfg.points = p;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = py.detach(|| verify::run_identity_suite(&cfg)).map_err(to_py)?;
    Ok((report.exit_code(), verify::report::to_json(&report).map_err(to_py)?))
}

/// Built-in checks as `(name, value, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn selftest(seed: u64) -> PyResult<Vec<(String, f64, bool)>> {
    let report = verify::selftest::run_selftest(seed).map_err(to_py)?;
    Ok(report.checks.into_iter().map(|c| (c.name, c.value, c.passed)).collect())
}

#[pymodule]
fn hkreduce_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(ad_invariance_defect, m)?)?;
    m.add_function(wrap_pyfunction!(verify_config, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
