//! Python bindings. Functions are lists of complex samples in row-major order.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use varbesov::atoms::{atomize, kl_requirements, synthesize_atoms, validate_atom, Window, DEFAULT_FD_TOL, DEFAULT_GAMMA, DEFAULT_MOM_TOL};
use varbesov::besov::{besov_norm, besov_norm_peetre, besov_norm_sharp, besov_norm_shifted};
use varbesov::exponent::{conjugate_exponent, ExponentField, Role};
use varbesov::grid::{Grid as CoreGrid, GridFunction};
use varbesov::harness::report::payload_json;
use varbesov::harness::{run_embedding, run_lemma_check, run_oracle_reduction, Config, EmbeddingId, Harness, LemmaId};
use varbesov::io::{SequenceDoc, SpaceSpec};
use varbesov::modular::{luxemburg_norm, mixed_norm, modular, tilde_norm};
use varbesov::phi::TransformPair;
use varbesov::sequence::{b_norm, CoeffEntry, SequenceCoeffs, SpaceParams};
use varbesov::solver::DEFAULT_TOL;
use varbesov::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Overflow { .. } | Error::NoConvergence { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Grid {
    inner: CoreGrid,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(dim: usize, jmax: u32, jfine: u32) -> PyResult<Self> {
        Ok(Grid { inner: CoreGrid::new(dim, jmax, jfine).map_err(py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn jmax(&self) -> u32 {
        self.inner.jmax
    }

    #[getter]
    fn jfine(&self) -> u32 {
        self.inner.jfine
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn side(&self) -> f64 {
        self.inner.side()
    }

    fn refined(&self) -> Grid {
        Grid { inner: self.inner.refined() }
    }

    /// Sample coordinates, `[x]` or `[x, y]` per point.
    fn coords(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.coord(i)[..self.inner.dim].to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={}, jmax={}, jfine={})", self.inner.dim, self.inner.jmax, self.inner.jfine)
    }
}

/// Exponents `α, τ, p, q` on a grid.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Space {
    inner: SpaceParams,
}

#[pymethods]
impl Space {
    #[staticmethod]
    fn constant(grid: Grid, alpha: f64, tau: f64, p: f64, q: f64) -> PyResult<Self> {
        Ok(Space { inner: SpaceParams::constant(&grid.inner, alpha, tau, p, q).map_err(py_err)? })
    }

    /// From the config form `{"alpha": {...}, "tau": ..., "p": ..., "q": ..., "window": [lo, hi]?}`.
    #[staticmethod]
    fn from_json(grid: Grid, text: &str) -> PyResult<Self> {
        let spec: SpaceSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Space { inner: spec.build(&grid.inner).map_err(py_err)? })
    }

    #[getter]
    fn window(&self) -> (i32, i32) {
        self.inner.window
    }

    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.samples().to_vec()
    }

    fn tau(&self) -> Vec<f64> {
        self.inner.tau.samples().to_vec()
    }

    fn p(&self) -> Vec<f64> {
        self.inner.p.samples().to_vec()
    }

    fn q(&self) -> Vec<f64> {
        self.inner.q.samples().to_vec()
    }
}

/// Coefficients `λ_{v,m}`.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Sequence {
    inner: SequenceCoeffs,
}

#[pymethods]
impl Sequence {
    #[staticmethod]
    fn zeros(grid: Grid, v_max: i32) -> PyResult<Self> {
        Ok(Sequence { inner: SequenceCoeffs::zeros(&grid.inner, v_max).map_err(py_err)? })
    }

    fn get(&self, v: i32, m: Vec<i64>) -> Complex64 {
        self.inner.get(v, &m)
    }

    fn set(&mut self, v: i32, m: Vec<i64>, value: Complex64) -> PyResult<()> {
        self.inner.set(v, &m, value).map_err(py_err)
    }

    #[getter]
    fn v_max(&self) -> i32 {
        self.inner.v_max()
    }

    /// Nonzero entries as `(v, m, value)`.
    fn entries(&self) -> Vec<(i32, Vec<i64>, Complex64)> {
        self.inner.entries().into_iter().map(|CoeffEntry { v, m, re, im }| (v, m, Complex64::new(re, im))).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&SequenceDoc::from_coeffs(&self.inner)).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: SequenceDoc = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Sequence { inner: doc.to_coeffs().map_err(py_err)? })
    }
}

fn function(grid: &Grid, values: Vec<Complex64>) -> PyResult<GridFunction> {
    GridFunction::new(&grid.inner, values).map_err(py_err)
}

fn field(grid: &Grid, role: Role, samples: Vec<f64>) -> PyResult<ExponentField> {
    ExponentField::new(&grid.inner, role, samples, None).map_err(py_err)
}

#[pyfunction(name = "modular")]
fn py_modular(grid: Grid, values: Vec<Complex64>, p: Vec<f64>) -> PyResult<f64> {
    modular(&function(&grid, values)?, &field(&grid, Role::Integrability, p)?).map_err(py_err)
}

#[pyfunction(name = "luxemburg_norm")]
#[pyo3(signature = (grid, values, p, tol = DEFAULT_TOL))]
fn py_luxemburg_norm(grid: Grid, values: Vec<Complex64>, p: Vec<f64>, tol: f64) -> PyResult<f64> {
    Ok(luxemburg_norm(&function(&grid, values)?, &field(&grid, Role::Integrability, p)?, tol).map_err(py_err)?.value)
}

#[pyfunction(name = "mixed_norm")]
#[pyo3(signature = (grid, levels, p, q, tol = DEFAULT_TOL))]
fn py_mixed_norm(grid: Grid, levels: Vec<Vec<Complex64>>, p: Vec<f64>, q: Vec<f64>, tol: f64) -> PyResult<f64> {
    let fs = levels.into_iter().map(|l| function(&grid, l)).collect::<PyResult<Vec<_>>>()?;
    let (p, q) = (field(&grid, Role::Integrability, p)?, field(&grid, Role::Summability, q)?);
    Ok(mixed_norm(&fs, &p, &q, tol).map_err(py_err)?.value)
}

#[pyfunction(name = "tilde_norm")]
#[pyo3(signature = (grid, values, p, tau, tol = DEFAULT_TOL))]
fn py_tilde_norm(grid: Grid, values: Vec<Complex64>, p: Vec<f64>, tau: Vec<f64>, tol: f64) -> PyResult<f64> {
    let (p, tau) = (field(&grid, Role::Integrability, p)?, field(&grid, Role::Tau, tau)?);
    Ok(tilde_norm(&function(&grid, values)?, &p, &tau, tol).map_err(py_err)?.value)
}

#[pyfunction(name = "conjugate_exponent")]
fn py_conjugate_exponent(grid: Grid, p: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(conjugate_exponent(&field(&grid, Role::Integrability, p)?).map_err(py_err)?.samples().to_vec())
}

/// `variant` is one of `base`, `sharp`, `shifted`, `peetre`.
#[pyfunction(name = "besov_norm")]
#[pyo3(signature = (grid, values, space, variant = "base", gamma = 1, a = None))]
fn py_besov_norm(grid: Grid, values: Vec<Complex64>, space: &Space, variant: &str, gamma: i32, a: Option<f64>) -> PyResult<f64> {
    let f = function(&grid, values)?;
    let pair = TransformPair::new(&grid.inner).map_err(py_err)?;
    let sp = &space.inner;
    let r = match variant {
        "base" => besov_norm(&f, sp, &pair),
        "sharp" => besov_norm_sharp(&f, sp, &pair),
        "shifted" => besov_norm_shifted(&f, sp, &pair, gamma),
        "peetre" => besov_norm_peetre(&f, sp, &pair, a).map(|p| p.result),
        _ => return Err(PyValueError::new_err(format!("unknown variant {variant:?}"))),
    };
    Ok(r.map_err(py_err)?.value)
}

#[pyfunction(name = "b_norm")]
fn py_b_norm(seq: &Sequence, space: &Space) -> PyResult<f64> {
    Ok(b_norm(&seq.inner, &space.inner, &seq.inner.grid).map_err(py_err)?.value)
}

/// Analysis/synthesis pair of the φ-transform on one grid.
#[pyclass]
struct PhiTransform {
    grid: Grid,
    pair: TransformPair,
}

#[pymethods]
impl PhiTransform {
    #[new]
    fn new(grid: Grid) -> PyResult<Self> {
        Ok(PhiTransform { grid, pair: TransformPair::new(&grid.inner).map_err(py_err)? })
    }

    #[getter]
    fn v_max(&self) -> i32 {
        self.pair.v_max()
    }

    fn analyze(&self, values: Vec<Complex64>) -> PyResult<Sequence> {
        Ok(Sequence { inner: self.pair.analyze(&function(&self.grid, values)?).map_err(py_err)? })
    }

    fn synthesize(&self, seq: &Sequence) -> PyResult<Vec<Complex64>> {
        Ok(self.pair.synthesize(&seq.inner).map_err(py_err)?.values)
    }

    fn calderon_residual(&self) -> f64 {
        self.pair.calderon_residual()
    }
}

/// Atomizes `values`; K and L from `space`. Returns the coefficients, the
/// atomization as JSON and whether every atom validates.
#[pyfunction(name = "atomize")]
#[pyo3(signature = (grid, values, space, window = "bump", gamma = DEFAULT_GAMMA))]
fn py_atomize(grid: Grid, values: Vec<Complex64>, space: &Space, window: &str, gamma: f64) -> PyResult<(Sequence, String, bool)> {
    let f = function(&grid, values)?;
    let pair = TransformPair::new(&grid.inner).map_err(py_err)?;
    let (k, l) = kl_requirements(&space.inner, grid.inner.dim).map_err(py_err)?;
    let window = match window {
        "bump" => Window::Bump { gamma },
        "dual" => Window::Dual,
        _ => return Err(PyValueError::new_err(format!("unknown window {window:?}"))),
    };
    let (lambda, at) = atomize(&f, &pair, window, k, l).map_err(py_err)?;
    let mut valid = true;
    for a in &at.atoms {
        valid &= validate_atom(&grid.inner, a, DEFAULT_FD_TOL, DEFAULT_MOM_TOL).map_err(py_err)?.pass;
    }
    let text = serde_json::to_string(&at).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((Sequence { inner: lambda }, text, valid))
}

/// `Σ λ_Q a_Q` for an atomization JSON from `atomize`.
#[pyfunction(name = "synthesize_atoms")]
fn py_synthesize_atoms(seq: &Sequence, atomization: &str) -> PyResult<Vec<Complex64>> {
    let at: varbesov::atoms::Atomization = serde_json::from_str(atomization).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(synthesize_atoms(&seq.inner, &at.atoms).map_err(py_err)?.values)
}

fn harness(config: Option<&str>) -> PyResult<Harness> {
    let config = match config {
        Some(text) => Config::parse(text).map_err(py_err)?,
        None => Config::new(CoreGrid::default_for_dim(1)),
    };
    Harness::new(config).map_err(py_err)
}

/// Runs one lemma check (or `oracle_reduction`); returns the report list as JSON.
#[pyfunction(name = "run_check")]
#[pyo3(signature = (id, config = None))]
fn py_run_check(py: Python<'_>, id: &str, config: Option<&str>) -> PyResult<String> {
    let h = harness(config)?;
    let report = if id.replace(['_', '-'], "").eq_ignore_ascii_case("oraclereduction") {
        py.detach(|| run_oracle_reduction(&h))
    } else {
        let id: LemmaId = id.parse().map_err(py_err)?;
        py.detach(|| run_lemma_check(&h, id))
    }
    .map_err(py_err)?;
    payload_json(&[report]).map_err(py_err)
}

#[pyfunction(name = "run_embedding")]
#[pyo3(signature = (id, config = None))]
fn py_run_embedding(py: Python<'_>, id: &str, config: Option<&str>) -> PyResult<String> {
    let h = harness(config)?;
    let id: EmbeddingId = id.parse().map_err(py_err)?;
    let report = py.detach(|| run_embedding(&h, id)).map_err(py_err)?;
    payload_json(&[report]).map_err(py_err)
}

#[pymodule]
fn varbesov_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Space>()?;
    m.add_class::<Sequence>()?;
    m.add_class::<PhiTransform>()?;
    m.add("P_CAP", varbesov::exponent::P_CAP)?;
    m.add_function(wrap_pyfunction!(py_modular, m)?)?;
    m.add_function(wrap_pyfunction!(py_luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_mixed_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_tilde_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_conjugate_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(py_besov_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_b_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_atomize, m)?)?;
    m.add_function(wrap_pyfunction!(py_synthesize_atoms, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_check, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_embedding, m)?)?;
    Ok(())
}
