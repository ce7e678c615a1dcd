//! Python bindings for the `gabor_ewald` solver.
//!
//! ```python
//! import gabor_ewald_py as ge
//! sim = ge.Simulation.from_file("configs/circle.json")
//! metrics = sim.solve()
//! values = sim.field([0.0, 0.5], [0.0], "chi_e_scattered")
//! ```

use gabor_ewald::cli::RunConfig;
use gabor_ewald::frame::{default_dual, FrameParams, Window};
use gabor_ewald::green::{self, EwaldConfig};
use gabor_ewald::oracle::{self, MoMConfig};
use gabor_ewald::scene::{self, Shape};
use gabor_ewald::solver::{synthesize_field, FieldKind, Solution};
use gabor_ewald::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::InvalidFrame(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn json_to_py(py: Python<'_>, v: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Constants of the Gabor frame.
#[pyclass(name = "FrameParams", from_py_object)]
#[derive(Clone)]
struct PyFrameParams {
    inner: FrameParams,
}

#[pymethods]
impl PyFrameParams {
    #[new]
    #[pyo3(signature = (x_width, alpha, beta, m_max, n_max))]
    fn new(x_width: f64, alpha: f64, beta: f64, m_max: usize, n_max: usize) -> PyResult<Self> {
        FrameParams::new(x_width, alpha, beta, m_max, n_max)
            .map(|inner| PyFrameParams { inner })
            .map_err(to_py)
    }

    /// `X = 0.5`, `α = β = √(2/3)`.
    #[staticmethod]
    fn standard(m_max: usize, n_max: usize) -> Self {
        PyFrameParams {
            inner: FrameParams::standard(m_max, n_max),
        }
    }

    #[getter]
    fn x_width(&self) -> f64 {
        self.inner.x_width
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn m_max(&self) -> usize {
        self.inner.m_max
    }
    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max
    }

    /// `g_mn(x)`.
    fn element(&self, x: f64, m: i64, n: i64) -> Complex64 {
        gabor_ewald::frame::frame_element(x, m, n, &self.inner)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "FrameParams(x_width={}, alpha={}, beta={}, m_max={}, n_max={})",
            p.x_width, p.alpha, p.beta, p.m_max, p.n_max
        )
    }
}

/// Gaussian-sum fit of the canonical dual window.
#[pyclass(name = "DualWindow")]
struct PyDualWindow {
    inner: gabor_ewald::frame::DualWindow,
}

#[pymethods]
impl PyDualWindow {
    #[new]
    #[pyo3(signature = (frame, n_u=2, n_v=3))]
    fn new(frame: &PyFrameParams, n_u: usize, n_v: usize) -> PyResult<Self> {
        let (_, inner) = default_dual(&frame.inner, n_u, n_v).map_err(to_py)?;
        Ok(PyDualWindow { inner })
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }
    #[getter]
    fn condition(&self) -> f64 {
        self.inner.condition
    }

    fn coeff(&self, u: i64, v: i64) -> PyResult<Complex64> {
        if u.unsigned_abs() as usize > self.inner.n_u || v.unsigned_abs() as usize > self.inner.n_v {
            return Err(PyValueError::new_err(format!("({u}, {v}) outside the fitted index range")));
        }
        Ok(self.inner.coeff(u, v))
    }

    fn value(&self, x: f64) -> Complex64 {
        self.inner.value(x)
    }
}

/// A dielectric object lit by a plane wave.
#[pyclass(name = "Scene", from_py_object)]
#[derive(Clone)]
struct PyScene {
    inner: scene::Scene,
}

#[pymethods]
impl PyScene {
    #[staticmethod]
    fn circle() -> Self {
        PyScene {
            inner: scene::Scene::circle(),
        }
    }
    #[staticmethod]
    fn rectangle() -> Self {
        PyScene {
            inner: scene::Scene::rectangle(),
        }
    }
    #[staticmethod]
    fn grating() -> Self {
        PyScene {
            inner: scene::Scene::grating(),
        }
    }

    /// Circular cylinder of `radius` with incidence angle in degrees.
    #[staticmethod]
    #[pyo3(signature = (radius, eps_r, k0, theta_deg=0.0))]
    fn cylinder(radius: f64, eps_r: f64, k0: f64, theta_deg: f64) -> PyResult<Self> {
        let s = scene::Scene {
            shape: Shape::Circle { radius },
            eps_r,
            k0,
            theta: theta_deg.to_radians(),
            e0: 1.0,
            center: (0.0, 0.0),
        };
        s.validate().map_err(to_py)?;
        Ok(PyScene { inner: s })
    }

    #[getter]
    fn k0(&self) -> f64 {
        self.inner.k0
    }
    #[getter]
    fn eps_r(&self) -> f64 {
        self.inner.eps_r
    }

    fn contrast(&self, x: f64, z: f64) -> f64 {
        scene::contrast_at(x, z, &self.inner)
    }

    fn incident(&self, x: f64, z: f64) -> Complex64 {
        scene::incident_field(x, z, &self.inner)
    }
}

/// A configured run: load a JSON configuration, solve, sample fields.
#[pyclass(name = "Simulation")]
struct PySimulation {
    cfg: RunConfig,
    solution: Option<Solution>,
}

fn parse_kind(kind: &str) -> PyResult<FieldKind> {
    match kind {
        "chi_e_scattered" => Ok(FieldKind::ChiEScattered),
        "chi_e_total" => Ok(FieldKind::ChiETotal),
        "e_scattered" => Ok(FieldKind::EScattered),
        _ => Err(PyValueError::new_err(format!(
            "unknown field '{kind}'; use chi_e_scattered, chi_e_total or e_scattered"
        ))),
    }
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        Ok(PySimulation {
            cfg: RunConfig::from_json_str(config_json).map_err(to_py)?,
            solution: None,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PySimulation {
            cfg: RunConfig::load(std::path::Path::new(path)).map_err(to_py)?,
            solution: None,
        })
    }

    #[getter]
    fn unknowns(&self) -> usize {
        let fp = self.cfg.frame_params();
        fp.per_slice() * self.cfg.z_grid().map(|z| z.len()).unwrap_or(0)
    }

    /// Solves the scene and returns the metrics as a dict.
    fn solve(&mut self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let cfg = self.cfg.clone();
        let (sol, metrics) = py
            .detach(move || gabor_ewald::cli::solve_scene(&cfg))
            .map_err(to_py)?;
        self.solution = Some(sol);
        json_to_py(py, &metrics)
    }

    /// Field values on the tensor grid `xs × zs`, z-outer.
    #[pyo3(signature = (xs, zs, kind="chi_e_scattered"))]
    fn field(&self, xs: Vec<f64>, zs: Vec<f64>, kind: &str) -> PyResult<Vec<Complex64>> {
        let which = parse_kind(kind)?;
        let sol = self
            .solution
            .as_ref()
            .ok_or_else(|| PyRuntimeError::new_err("call solve() first"))?;
        let zg = self.cfg.z_grid().map_err(to_py)?;
        Ok(synthesize_field(sol, &xs, &zs, &self.cfg.frame_params(), &zg, which))
    }
}

/// `(1/4j) H0^(2)(k0 r)`.
#[pyfunction]
fn green_exact(r: f64, k0: f64) -> PyResult<Complex64> {
    green::green_exact(r, k0).map_err(to_py)
}

/// Spatial and spectral parts of the Ewald-split Green function.
#[pyfunction]
#[pyo3(signature = (dx, dz, k0, split=None, delta=0.05))]
fn green_split(dx: f64, dz: f64, k0: f64, split: Option<f64>, delta: f64) -> PyResult<(Complex64, Complex64)> {
    let e = split.unwrap_or_else(|| green::optimal_split(k0, delta));
    let cfg = EwaldConfig::new(e, k0, 1e-10, 1e-14).map_err(to_py)?;
    Ok((
        green::green_spatial(dx, dz, &cfg).map_err(to_py)?,
        green::green_spectral(dx, dz, &cfg).map_err(to_py)?,
    ))
}

#[pyfunction]
fn optimal_split(k0: f64, delta: f64) -> f64 {
    green::optimal_split(k0, delta)
}

/// Scattered field of a circular cylinder from the series solution.
#[pyfunction]
fn cylinder_series(scene: &PyScene, x: f64, z: f64) -> PyResult<Complex64> {
    oracle::cylinder_series(&scene.inner, x, z).map_err(to_py)
}

/// MoM reference: returns `(xs, zs, scattered)` on the cell centres.
#[pyfunction]
#[pyo3(signature = (scene, cell=None))]
fn mom_solve(py: Python<'_>, scene: &PyScene, cell: Option<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Complex64>)> {
    let mut cfg = MoMConfig::for_wavenumber(scene.inner.k0);
    if let Some(c) = cell {
        cfg.cell = c;
    }
    let s = scene.inner;
    let sol = py.detach(move || oracle::mom_solve(&s, &cfg)).map_err(to_py)?;
    let es = sol.scattered();
    Ok((es.xs, es.zs, es.values))
}

#[pymodule]
fn gabor_ewald_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrameParams>()?;
    m.add_class::<PyDualWindow>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(green_exact, m)?)?;
    m.add_function(wrap_pyfunction!(green_split, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_split, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder_series, m)?)?;
    m.add_function(wrap_pyfunction!(mom_solve, m)?)?;
    Ok(())
}
