//! Command-line front end: configuration, pipeline orchestration and file
//! output.
//!
//! A run is described by a JSON document with the blocks `scene`, `frame`,
//! `zgrid`, `dual`, `ewald`, `solver`, `output` and `cache`; see
//! `configs/` for complete examples. Relative paths are taken from the
//! working directory.

use crate::error::{Error, Result};
use crate::frame::{default_dual, DualWindow, FrameParams, SampledWindow, Window};
use crate::green::{green_exact, green_spatial, green_spectral, optimal_split, EwaldConfig};
use crate::kernels::ZGrid;
use crate::oracle::{compare_fields, cylinder_series, mom_solve, region_mask, FieldGrid, MoMConfig, Region};
use crate::scene::{contrast_at, Scene, Shape};
use crate::solver::{prepare_with_dual, solve_system, synthesize_field, FieldKind, Method, SolveOptions, Solution};
use crate::tables::{cache_path, load_or_build, TableKind, TableMeta};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit status for invalid configurations.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for solver or quadrature failures.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for any other failure.
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneBlock {
    pub shape: Shape,
    pub eps_r: f64,
    pub k0: f64,
    #[serde(default)]
    pub theta_deg: f64,
    #[serde(rename = "E0", default = "one")]
    pub e0: f64,
    #[serde(default)]
    pub center: (f64, f64),
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBlock {
    #[serde(rename = "X")]
    pub x_width: f64,
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridBlock {
    pub z_min: f64,
    pub z_max: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualBlock {
    #[serde(rename = "N_u", default = "two")]
    pub n_u: usize,
    #[serde(rename = "N_v", default = "three")]
    pub n_v: usize,
    /// Largest acceptable relative fit residual.
    #[serde(default = "default_fit_tol")]
    pub fit_tol: f64,
}

fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn default_fit_tol() -> f64 {
    1e-2
}

impl Default for DualBlock {
    fn default() -> Self {
        DualBlock {
            n_u: 2,
            n_v: 3,
            fit_tol: default_fit_tol(),
        }
    }
}

/// `"auto"` or an explicit splitting parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Split {
    Value(f64),
    Named(SplitName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EwaldBlock {
    #[serde(default = "auto_split")]
    pub split: Split,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
}

fn auto_split() -> Split {
    Split::Named(SplitName::Auto)
}
fn default_quad_tol() -> f64 {
    1e-10
}
fn default_trunc_tol() -> f64 {
    1e-14
}

impl Default for EwaldBlock {
    fn default() -> Self {
        EwaldBlock {
            split: auto_split(),
            quad_tol: default_quad_tol(),
            trunc_tol: default_trunc_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "auto_method")]
    pub method: MethodChoice,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
    /// Estimate the condition number after a direct solve.
    #[serde(default = "yes")]
    pub condition: bool,
}

fn auto_method() -> MethodChoice {
    MethodChoice::Auto
}
fn default_max_iter() -> usize {
    2000
}
fn default_restart() -> usize {
    60
}
fn yes() -> bool {
    true
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            method: MethodChoice::Auto,
            tol: None,
            max_iter: default_max_iter(),
            restart: default_restart(),
            condition: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    pub out_dir: PathBuf,
    #[serde(default = "default_field")]
    pub field: FieldKind,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Pgm]
}
fn default_field() -> FieldKind {
    FieldKind::ChiEScattered
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheBlock {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub path: PathBuf,
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneBlock,
    pub frame: FrameBlock,
    pub zgrid: ZGridBlock,
    #[serde(default)]
    pub dual: DualBlock,
    #[serde(default)]
    pub ewald: EwaldBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    pub output: OutputBlock,
    #[serde(default)]
    pub cache: Option<CacheBlock>,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses and validates a configuration. Syntax and schema errors are
    /// reported with their line and column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            config_error(
                &format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(field, format!("{v} must be positive")))
            }
        };
        let s = &self.scene;
        if !(0.0..360.0).contains(&s.theta_deg) {
            return Err(config_error("scene.theta_deg", format!("{} must lie in [0, 360)", s.theta_deg)));
        }
        positive("scene.E0", s.e0)?;
        self.scene().validate()?;
        positive("frame.X", self.frame.x_width)?;
        positive("frame.alpha", self.frame.alpha)?;
        positive("frame.beta", self.frame.beta)?;
        let fp = self.frame_params();
        fp.validate().map_err(|e| config_error("frame.alpha*beta", e.to_string()))?;
        let zg = self.z_grid()?;
        if self.dual.fit_tol.is_nan() || self.dual.fit_tol <= 0.0 {
            return Err(config_error("dual.fit_tol", "must be positive"));
        }
        self.ewald_config()?;
        self.scene().check_fits(&fp, &zg)?;
        if let Some(t) = self.solver.tol {
            positive("solver.tol", t)?;
        }
        if self.solver.restart == 0 || self.solver.max_iter == 0 {
            return Err(config_error("solver.restart", "restart and max_iter must be positive"));
        }
        let o = &self.output;
        if !(o.x_max >= o.x_min) || !(o.z_max >= o.z_min) || o.nx == 0 || o.nz == 0 {
            return Err(config_error("output", "need x_max >= x_min, z_max >= z_min and nx, nz >= 1"));
        }
        let reach = fp.m_max as f64 * fp.shift();
        if o.x_min < -reach || o.x_max > reach {
            return Err(config_error(
                "output.x_min",
                format!("output extent must stay within the frame coverage |x| <= {reach:.4}"),
            ));
        }
        if o.z_min < zg.z_min - 1e-12 || o.z_max > zg.z_max + 1e-12 {
            return Err(config_error(
                "output.z_min",
                format!("output extent must stay within the z grid [{}, {}]", zg.z_min, zg.z_max),
            ));
        }
        Ok(())
    }

    pub fn scene(&self) -> Scene {
        let s = &self.scene;
        Scene {
            shape: s.shape,
            eps_r: s.eps_r,
            k0: s.k0,
            theta: s.theta_deg.to_radians(),
            e0: s.e0,
            center: s.center,
        }
    }

    pub fn frame_params(&self) -> FrameParams {
        let f = &self.frame;
        FrameParams {
            x_width: f.x_width,
            alpha: f.alpha,
            beta: f.beta,
            m_max: f.m_max,
            n_max: f.n_max,
        }
    }

    pub fn z_grid(&self) -> Result<ZGrid> {
        let z = &self.zgrid;
        ZGrid::new(z.z_min, z.z_max, z.delta).map_err(|e| config_error("zgrid", e.to_string()))
    }

    pub fn ewald_config(&self) -> Result<EwaldConfig> {
        let e = &self.ewald;
        let split = match e.split {
            Split::Named(SplitName::Auto) => optimal_split(self.scene.k0, self.zgrid.delta),
            Split::Value(v) => v,
        };
        EwaldConfig::new(split, self.scene.k0, e.quad_tol, e.trunc_tol).map_err(|err| config_error("ewald", err.to_string()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            method: match s.method {
                MethodChoice::Auto => None,
                MethodChoice::Direct => Some(Method::Direct),
                MethodChoice::Iterative => Some(Method::Iterative),
            },
            tol: s.tol,
            max_iter: s.max_iter,
            restart: s.restart,
            condition: s.condition,
            ..SolveOptions::default()
        }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache.as_ref().filter(|c| c.enabled).map(|c| c.path.as_path())
    }

    /// Output sample positions along `x` and `z`.
    pub fn output_axes(&self) -> (Vec<f64>, Vec<f64>) {
        let o = &self.output;
        (linspace(o.x_min, o.x_max, o.nx), linspace(o.z_min, o.z_max, o.nz))
    }

    /// Fits the dual window and checks the residual against `dual.fit_tol`.
    pub fn dual_window(&self) -> Result<(SampledWindow, DualWindow)> {
        let (eta, dual) = default_dual(&self.frame_params(), self.dual.n_u, self.dual.n_v)?;
        if dual.residual > self.dual.fit_tol {
            return Err(config_error(
                "dual.fit_tol",
                format!(
                    "fit residual {:.3e} with N_u={}, N_v={} exceeds {:.3e}; raise N_u or N_v",
                    dual.residual, self.dual.n_u, self.dual.n_v, self.dual.fit_tol
                ),
            ));
        }
        Ok((eta, dual))
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Metrics written next to the field after a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub residual_norm: f64,
    pub iterations: usize,
    pub wall_time_setup: f64,
    pub wall_time_solve: f64,
    pub table_cache_hit: bool,
    pub condition_estimate: Option<f64>,
    pub unknowns: usize,
    pub method: Method,
    pub dual_residual: f64,
}

/// Output of [`run_solve`].
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub solution: Solution,
    pub metrics: Metrics,
    pub field: FieldGrid,
    pub files: Vec<PathBuf>,
}

/// Runs the full pipeline: dual window, tables, solve, synthesis.
pub fn solve_scene(cfg: &RunConfig) -> Result<(Solution, Metrics)> {
    let start = Instant::now();
    let (_, dual) = cfg.dual_window()?;
    let zg = cfg.z_grid()?;
    let ecfg = cfg.ewald_config()?;
    let prepared = prepare_with_dual(&cfg.scene(), &zg, &ecfg, &dual, cfg.cache_dir())?;
    let setup = start.elapsed().as_secs_f64();
    let sol = solve_system(&prepared.op, &prepared.j_inc, &cfg.solve_options())?;
    let metrics = Metrics {
        residual_norm: sol.residual_norm,
        iterations: sol.iterations,
        wall_time_setup: setup,
        wall_time_solve: sol.wall_time,
        table_cache_hit: prepared.table_cache_hit,
        condition_estimate: sol.condition_estimate,
        unknowns: prepared.op.unknowns(),
        method: sol.method,
        dual_residual: dual.residual,
    };
    Ok((sol, metrics))
}

/// `solve` subcommand: writes the field in the requested formats and the
/// metrics JSON into `output.out_dir`.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveRun> {
    let (sol, metrics) = solve_scene(cfg)?;
    let (xs, zs) = cfg.output_axes();
    let values = synthesize_field(&sol, &xs, &zs, &cfg.frame_params(), &cfg.z_grid()?, cfg.output.field);
    let field = FieldGrid { xs, zs, values };
    let dir = &cfg.output.out_dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for f in &cfg.output.formats {
        match f {
            Format::Csv => {
                let p = dir.join("field.csv");
                write_csv(&p, &field)?;
                files.push(p);
            }
            Format::Pgm => {
                let p = dir.join("field.pgm");
                let side = write_pgm(&p, &field)?;
                files.push(p);
                files.push(side);
            }
        }
    }
    let p = dir.join("metrics.json");
    write_json(&p, &metrics)?;
    files.push(p);
    Ok(SolveRun {
        solution: sol,
        metrics,
        field,
        files,
    })
}

/// Writes `x,z,re,im` rows, z-outer, with 17 significant digits.
pub fn write_csv(path: &Path, field: &FieldGrid) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,z,re,im")?;
    for ((x, z), v) in field.points().zip(&field.values) {
        writeln!(w, "{x:.16e},{z:.16e},{:.16e},{:.16e}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<FieldGrid> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("x,z,re,im") {
        return Err(Error::GridMismatch(format!("{} lacks the x,z,re,im header", path.display())));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut zs: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::GridMismatch(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if v.len() != 4 {
            return Err(Error::GridMismatch(format!("{} line {} needs 4 columns", path.display(), i + 2)));
        }
        if zs.last() != Some(&v[1]) {
            zs.push(v[1]);
        }
        if zs.len() == 1 {
            xs.push(v[0]);
        }
        values.push(Complex64::new(v[2], v[3]));
    }
    if values.len() != xs.len() * zs.len() {
        return Err(Error::GridMismatch(format!("{} is not a tensor grid", path.display())));
    }
    Ok(FieldGrid { xs, zs, values })
}

/// Writes an 8-bit P5 image of the real part, top row at the largest `z`,
/// and a sidecar `<path>.json` with the mapping range. Returns the sidecar
/// path.
pub fn write_pgm(path: &Path, field: &FieldGrid) -> Result<PathBuf> {
    let (nx, nz) = (field.xs.len(), field.zs.len());
    let re: Vec<f64> = field.values.iter().map(|v| v.re).collect();
    let lo = re.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut bytes = format!("P5\n{nx} {nz}\n255\n").into_bytes();
    for row in (0..nz).rev() {
        for col in 0..nx {
            let v = re[row * nx + col];
            let g = if span > 0.0 { ((v - lo) / span * 255.0).round() } else { 0.0 };
            bytes.push(g.clamp(0.0, 255.0) as u8);
        }
    }
    fs::write(path, bytes)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    let side = PathBuf::from(side);
    write_json(
        &side,
        &json!({
            "quantity": "re",
            "min": lo,
            "max": hi,
            "width": nx,
            "height": nz,
            "x_range": [field.xs[0], field.xs[nx - 1]],
            "z_range": [field.zs[0], field.zs[nz - 1]],
            "top_row": "z_max",
        }),
    )?;
    Ok(side)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.into()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Ewald split check over `n` log-spaced distances.
pub fn green_check(k0: f64, rmin: f64, rmax: f64, split: Split, delta: f64, n: usize) -> Result<serde_json::Value> {
    if !(rmin > 0.0 && rmax >= rmin) {
        return Err(config_error("--rmin", "need 0 < rmin <= rmax"));
    }
    if n == 0 {
        return Err(config_error("--n", "need at least one point"));
    }
    let e = match split {
        Split::Named(SplitName::Auto) => optimal_split(k0, delta),
        Split::Value(v) => v,
    };
    let cfg = EwaldConfig::new(e, k0, default_quad_tol(), default_trunc_tol())
        .map_err(|err| config_error("--split", err.to_string()))?;
    let mut points = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        let r = rmin * (rmax / rmin).powf(t);
        // Split the distance between both axes so both code paths see it.
        let (dx, dz) = (0.6 * r, 0.8 * r);
        let exact = green_exact(r, k0)?;
        let sum = green_spatial(dx, dz, &cfg)? + green_spectral(dx, dz, &cfg)?;
        let err = (sum - exact).norm() / exact.norm();
        worst = worst.max(err);
        points.push(json!({
            "r": r,
            "exact": [exact.re, exact.im],
            "split_sum": [sum.re, sum.im],
            "relative_error": err,
        }));
    }
    Ok(json!({
        "k0": k0,
        "split": e,
        "max_relative_error": worst,
        "points": points,
    }))
}

/// `dual-window` subcommand: writes `dual_window.csv` with the sampled
/// canonical dual and the fitted Gaussian sum, and `dual.json`.
pub fn run_dual_window(cfg: &RunConfig) -> Result<serde_json::Value> {
    let (eta, dual) = default_dual(&cfg.frame_params(), cfg.dual.n_u, cfg.dual.n_v)?;
    let dir = &cfg.output.out_dir;
    fs::create_dir_all(dir)?;
    let csv = dir.join("dual_window.csv");
    let mut w = BufWriter::new(fs::File::create(&csv)?);
    writeln!(w, "x,eta_re,eta_im,fit_re,fit_im")?;
    for (x, e) in eta.grid.points().iter().zip(&eta.values) {
        let f = dual.value(*x);
        writeln!(w, "{x:.16e},{e:.16e},{:.16e},{:.16e},{:.16e}", 0.0, f.re, f.im)?;
    }
    w.flush()?;
    let mut coeffs = Vec::new();
    for u in -(dual.n_u as i64)..=dual.n_u as i64 {
        for v in -(dual.n_v as i64)..=dual.n_v as i64 {
            let a = dual.coeff(u, v);
            coeffs.push(json!({"u": u, "v": v, "re": a.re, "im": a.im}));
        }
    }
    let report = json!({
        "N_u": dual.n_u,
        "N_v": dual.n_v,
        "residual": dual.residual,
        "fit_tol": cfg.dual.fit_tol,
        "within_tol": dual.residual <= cfg.dual.fit_tol,
        "condition": dual.condition,
        "truncated": dual.truncated,
        "coefficients": coeffs,
    });
    write_json(&dir.join("dual.json"), &report)?;
    Ok(report)
}

/// `tables` subcommand: builds both kernel tables into the cache.
pub fn run_tables(cfg: &RunConfig) -> Result<serde_json::Value> {
    let Some(dir) = cfg.cache_dir() else {
        return Err(config_error("cache", "the tables subcommand needs an enabled cache block"));
    };
    let zg = cfg.z_grid()?;
    let ecfg = cfg.ewald_config()?;
    let fp = cfg.frame_params();
    let meta = TableMeta::new(&fp, &zg, &ecfg, cfg.dual.n_u, cfg.dual.n_v);
    let start = Instant::now();
    let (_, _, hit) = load_or_build(Some(dir), &meta)?;
    Ok(json!({
        "table_cache_hit": hit,
        "wall_time": start.elapsed().as_secs_f64(),
        "spatial": cache_path(dir, TableKind::Spatial, &meta),
        "spectral": cache_path(dir, TableKind::Spectral, &meta),
        "q_max": meta.q_max(),
        "p_max": meta.p_max(),
        "split": ecfg.split,
    }))
}

/// `compare` subcommand: solves with both the main solver and the MoM
/// oracle and compares `χE^s` on the oracle's cell centres inside the
/// object. The main value is `χ` times the synthesized scattered field;
/// `contrast_source_relative_l2` reports the same comparison for the
/// synthesized `J - J_inc`. Writes `compare.json` and `compare_error.csv`
/// (main minus oracle).
pub fn run_compare(cfg: &RunConfig, cell: f64) -> Result<serde_json::Value> {
    let scene = cfg.scene();
    let mcfg = MoMConfig {
        cell,
        ..MoMConfig::for_wavenumber(scene.k0)
    };
    mcfg.validate(scene.k0).map_err(|_| {
        config_error(
            "--oracle-cell",
            format!("{cell} must lie in (0, λ/10 = {}]", 2.0 * std::f64::consts::PI / scene.k0 / 10.0),
        )
    })?;
    let (sol, metrics) = solve_scene(cfg)?;
    let start = Instant::now();
    let mom = mom_solve(&scene, &mcfg)?;
    let oracle_time = start.elapsed().as_secs_f64();
    let es = mom.scattered();
    let chi_es = FieldGrid {
        xs: es.xs.clone(),
        zs: es.zs.clone(),
        values: es.points().zip(&es.values).map(|((x, z), v)| v * contrast_at(x, z, &scene)).collect(),
    };
    let (fp, zg) = (cfg.frame_params(), cfg.z_grid()?);
    let e_s = synthesize_field(&sol, &es.xs, &es.zs, &fp, &zg, FieldKind::EScattered);
    let main = FieldGrid {
        xs: es.xs.clone(),
        zs: es.zs.clone(),
        values: es.points().zip(&e_s).map(|((x, z), v)| v * contrast_at(x, z, &scene)).collect(),
    };
    let coeff = FieldGrid {
        xs: es.xs.clone(),
        zs: es.zs.clone(),
        values: synthesize_field(&sol, &es.xs, &es.zs, &fp, &zg, FieldKind::ChiEScattered),
    };
    let mask = region_mask(&es, &scene, Region::Inside);
    let m = compare_fields(&chi_es, &main, &mask)?;
    let mc = compare_fields(&chi_es, &coeff, &mask)?;
    let series = if matches!(scene.shape, Shape::Circle { .. }) {
        let values = es
            .points()
            .map(|(x, z)| cylinder_series(&scene, x, z))
            .collect::<Result<Vec<_>>>()?;
        let s = FieldGrid {
            xs: es.xs.clone(),
            zs: es.zs.clone(),
            values,
        };
        Some(compare_fields(&s, &es, &mask)?.relative_l2)
    } else {
        None
    };
    let dir = &cfg.output.out_dir;
    fs::create_dir_all(dir)?;
    let diff = FieldGrid {
        xs: es.xs.clone(),
        zs: es.zs.clone(),
        values: main.values.iter().zip(&chi_es.values).map(|(a, b)| a - b).collect(),
    };
    write_csv(&dir.join("compare_error.csv"), &diff)?;
    let report = json!({
        "relative_l2": m.relative_l2,
        "max_abs": m.max_abs,
        "mask": "inside",
        "contrast_source_relative_l2": mc.relative_l2,
        "oracle_cell": cell,
        "oracle_cells": es.values.len(),
        "oracle_wall_time": oracle_time,
        "oracle_vs_series_relative_l2": series,
        "solver": metrics,
    });
    write_json(&dir.join("compare.json"), &report)?;
    Ok(report)
}

/// Maps an error to the process exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidFrame(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } | Error::QuadratureFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_OTHER,
    }
}

/// Machine-readable description of a failure.
pub fn error_report(e: &Error) -> serde_json::Value {
    let mut v = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    match e {
        Error::Config { field, .. } => v["field"] = json!(field),
        Error::NonConvergence { iterations, residual } => {
            v["iterations"] = json!(iterations);
            v["residual"] = json!(residual);
        }
        Error::QuadratureFailure { context, error, tolerance } => {
            v["context"] = json!(context);
            v["estimated_error"] = json!(error);
            v["tolerance"] = json!(tolerance);
        }
        _ => {}
    }
    v
}

#[derive(Debug, Parser)]
#[command(name = "gabor-ewald", version, about = "2D TE scattering with a Gabor-frame / Ewald-split solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scene and write the field, heatmap and metrics.
    Solve { config: PathBuf },
    /// Compare the split Green function against the closed form.
    GreenCheck {
        #[arg(long)]
        k0: f64,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        /// Splitting parameter, or "auto" for the balanced choice.
        #[arg(long, default_value = "auto")]
        split: String,
        /// z spacing used by the balanced choice.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// Fit the dual window and write the sampled windows.
    DualWindow { config: PathBuf },
    /// Build the kernel tables into the cache.
    Tables { config: PathBuf },
    /// Solve and compare against the MoM oracle.
    Compare {
        config: PathBuf,
        #[arg(long)]
        oracle_cell: f64,
    },
}

fn parse_split(s: &str) -> Result<Split> {
    if s == "auto" {
        return Ok(Split::Named(SplitName::Auto));
    }
    s.parse::<f64>()
        .map(Split::Value)
        .map_err(|_| config_error("--split", format!("'{s}' is neither \"auto\" nor a number")))
}

/// `output.out_dir` of a config file that may not validate, so that
/// validation failures can still leave an `error.json` behind.
fn peek_out_dir(path: &Path) -> Option<PathBuf> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).ok()?).ok()?;
    v.get("output")?.get("out_dir")?.as_str().map(PathBuf::from)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

/// Runs one command and returns the exit status. Failures print a human
/// message and a JSON report to stderr; the report is also written to
/// `error.json` in the output directory when one is known.
pub fn run(cli: Cli) -> i32 {
    let mut out_dir: Option<PathBuf> = None;
    let result = (|| -> Result<()> {
        match &cli.command {
            Command::Solve { config } => {
                out_dir = peek_out_dir(config);
                let cfg = RunConfig::load(config)?;
                let r = run_solve(&cfg)?;
                print_json(&json!({"metrics": r.metrics, "files": r.files}));
            }
            Command::GreenCheck {
                k0,
                rmin,
                rmax,
                split,
                delta,
                n,
            } => {
                print_json(&green_check(*k0, *rmin, *rmax, parse_split(split)?, *delta, *n)?);
            }
            Command::DualWindow { config } => {
                out_dir = peek_out_dir(config);
                let cfg = RunConfig::load(config)?;
                print_json(&run_dual_window(&cfg)?);
            }
            Command::Tables { config } => {
                out_dir = peek_out_dir(config);
                let cfg = RunConfig::load(config)?;
                print_json(&run_tables(&cfg)?);
            }
            Command::Compare { config, oracle_cell } => {
                out_dir = peek_out_dir(config);
                let cfg = RunConfig::load(config)?;
                print_json(&run_compare(&cfg, *oracle_cell)?);
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let report = error_report(&e);
            eprintln!("error: {e}");
            eprintln!("{report}");
            if let Some(dir) = out_dir {
                if fs::create_dir_all(&dir).is_ok() {
                    let _ = write_json(&dir.join("error.json"), &report);
                }
            }
            exit_code(&e)
        }
    }
}

/// Parses the process arguments and runs the command.
pub fn main_from_env() -> i32 {
    run(Cli::parse())
}
