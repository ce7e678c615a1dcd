//! Solution of the contrast-source system and field synthesis.

use crate::error::{Error, Result};
use crate::frame::{default_dual, frame_element, CoeffTensor, DualWindow, FrameOps, FrameParams, XGrid};
use crate::green::EwaldConfig;
use crate::kernels::ZGrid;
use crate::operator::{DiscreteOperator, DENSE_CAP};
use crate::scene::{contrast_slices, project_source, Scene};
use crate::tables::{load_or_build, TableMeta};
use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Linear solution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dense LU factorization.
    Direct,
    /// Restarted GMRES with the operator applied matrix-free.
    Iterative,
}

/// Solver settings. `method = None` picks direct up to `dense_cap` unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Option<Method>,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub restart: usize,
    pub dense_cap: usize,
    /// Estimate the 1-norm condition number after a direct solve.
    pub condition: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: None,
            tol: None,
            max_iter: 2000,
            restart: 60,
            dense_cap: DENSE_CAP,
            condition: true,
        }
    }
}

impl SolveOptions {
    fn resolve(&self, unknowns: usize) -> (Method, f64) {
        let method = self.method.unwrap_or(if unknowns <= self.dense_cap {
            Method::Direct
        } else {
            Method::Iterative
        });
        let tol = self.tol.unwrap_or(match method {
            Method::Direct => 1e-8,
            Method::Iterative => 1e-6,
        });
        (method, tol)
    }
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Contrast source `χE`.
    pub j: CoeffTensor,
    /// Incident part `χE^i`.
    pub j_inc: CoeffTensor,
    /// Coefficients of the scattered field `E^s = G J`.
    pub e_s: CoeffTensor,
    /// `‖J - J_inc - M_χ G J‖ / ‖J_inc‖`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub wall_time: f64,
    pub method: Method,
    pub condition_estimate: Option<f64>,
}

/// Operator and right-hand side for one scene.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub op: DiscreteOperator,
    pub j_inc: CoeffTensor,
    pub table_cache_hit: bool,
    pub setup_time: f64,
}

/// Builds the dual window, loads or builds the tables and forms the
/// operator and incident projection.
pub fn prepare(
    scene: &Scene,
    fp: &FrameParams,
    zg: &ZGrid,
    cfg: &EwaldConfig,
    n_u: usize,
    n_v: usize,
    cache: Option<&Path>,
) -> Result<Prepared> {
    let start = Instant::now();
    scene.validate()?;
    scene.check_fits(fp, zg)?;
    let (_, dual) = default_dual(fp, n_u, n_v)?;
    prepare_with_dual(scene, zg, cfg, &dual, cache).map(|mut p| {
        p.setup_time = start.elapsed().as_secs_f64();
        p
    })
}

/// [`prepare`] with a given dual window.
pub fn prepare_with_dual(
    scene: &Scene,
    zg: &ZGrid,
    cfg: &EwaldConfig,
    dual: &DualWindow,
    cache: Option<&Path>,
) -> Result<Prepared> {
    let start = Instant::now();
    let fp = *dual.params();
    if (scene.k0 - cfg.k0).abs() > 1e-14 * scene.k0 {
        return Err(Error::Config {
            field: "scene.k0".into(),
            message: format!("scene k0 {} differs from the Ewald k0 {}", scene.k0, cfg.k0),
        });
    }
    let meta = TableMeta::new(&fp, zg, cfg, dual.n_u, dual.n_v);
    let (spatial, spectral, hit) = load_or_build(cache, &meta)?;
    let ops = FrameOps::new(&fp, XGrid::analysis(&fp), dual)?;
    let chi = contrast_slices(scene, &ops, zg);
    let j_inc = project_source(scene, &ops, zg);
    let op = DiscreteOperator::new(&spatial, &spectral, dual, ops, zg, chi)?;
    Ok(Prepared {
        op,
        j_inc,
        table_cache_hit: hit,
        setup_time: start.elapsed().as_secs_f64(),
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residual of `j` against `j_inc`.
pub fn relative_residual(op: &DiscreteOperator, j: &CoeffTensor, j_inc: &CoeffTensor) -> Result<f64> {
    let r = op.forward(j, j_inc)?;
    let b = j_inc.norm();
    Ok(if b == 0.0 { r.norm() } else { r.norm() / b })
}

/// Solves `J - M_χ G J = J_inc`.
pub fn solve_system(op: &DiscreteOperator, j_inc: &CoeffTensor, opts: &SolveOptions) -> Result<Solution> {
    let start = Instant::now();
    j_inc.check_shape(&op.fp, op.zg.n_k)?;
    let (method, tol) = opts.resolve(op.unknowns());
    if j_inc.norm() == 0.0 {
        return Ok(Solution {
            j: j_inc.clone(),
            j_inc: j_inc.clone(),
            e_s: j_inc.clone(),
            residual_norm: 0.0,
            iterations: 0,
            wall_time: start.elapsed().as_secs_f64(),
            method,
            condition_estimate: None,
        });
    }
    let (j, iterations, cond) = match method {
        Method::Direct => {
            let a = op.assemble_dense(opts.dense_cap)?;
            let (x, cond) = lu_solve(&a, &j_inc.data, opts.condition)?;
            let mut j = j_inc.clone();
            j.data = x;
            (j, 0, cond)
        }
        Method::Iterative => {
            let (x, it) = gmres(
                |v| {
                    let mut t = j_inc.clone();
                    t.data.copy_from_slice(v);
                    Ok(op.apply_system(&t)?.data)
                },
                &j_inc.data,
                tol,
                opts.restart,
                opts.max_iter,
            )?;
            let mut j = j_inc.clone();
            j.data = x;
            (j, it, None)
        }
    };
    let residual_norm = relative_residual(op, &j, j_inc)?;
    if !(residual_norm <= tol) {
        return Err(Error::NonConvergence {
            iterations,
            residual: residual_norm,
        });
    }
    let e_s = op.green_apply(&j)?;
    Ok(Solution {
        j,
        j_inc: j_inc.clone(),
        e_s,
        residual_norm,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        method,
        condition_estimate: cond,
    })
}

/// Prepares and solves a scene without a table cache.
pub fn solve(
    scene: &Scene,
    fp: &FrameParams,
    zg: &ZGrid,
    cfg: &EwaldConfig,
    method: Option<Method>,
    tol: Option<f64>,
) -> Result<Solution> {
    let p = prepare(scene, fp, zg, cfg, 2, 3, None)?;
    let opts = SolveOptions {
        method,
        tol,
        ..SolveOptions::default()
    };
    solve_system(&p.op, &p.j_inc, &opts)
}

/// Dense LU solve with an optional 1-norm condition estimate.
pub fn lu_solve(a: &Mat<Complex64>, b: &[Complex64], condition: bool) -> Result<(Vec<Complex64>, Option<f64>)> {
    let n = a.nrows();
    let lu = a.partial_piv_lu();
    let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let out: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    let cond = if condition {
        let inv_norm = inverse_norm1_estimate(n, |v, adjoint| {
            let m = Mat::<Complex64>::from_fn(n, 1, |i, _| v[i]);
            let y = if adjoint { lu.solve_adjoint(&m) } else { lu.solve(&m) };
            (0..n).map(|i| y[(i, 0)]).collect()
        });
        let a_norm = (0..n)
            .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0f64, f64::max);
        Some(a_norm * inv_norm)
    } else {
        None
    };
    Ok((out, cond))
}

/// Hager–Higham estimate of `‖A⁻¹‖₁` from solves with `A` and `Aᴴ`.
pub fn inverse_norm1_estimate<F>(n: usize, solve: F) -> f64
where
    F: Fn(&[Complex64], bool) -> Vec<Complex64>,
{
    let l1 = |v: &[Complex64]| v.iter().map(|x| x.norm()).sum::<f64>();
    let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for iter in 0..5 {
        let y = solve(&x, false);
        let ny = l1(&y);
        if iter > 0 && ny <= est {
            break;
        }
        est = ny;
        let xi: Vec<Complex64> = y
            .iter()
            .map(|v| if v.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v / v.norm() })
            .collect();
        let z = solve(&xi, true);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if iter > 0 && (zmax <= ztx || j == last_j) {
            break;
        }
        last_j = j;
        x = vec![Complex64::new(0.0, 0.0); n];
        x[j] = Complex64::new(1.0, 0.0);
    }
    // Higham's alternating test vector guards against unlucky iterates.
    let alt: Vec<Complex64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        })
        .collect();
    let y = solve(&alt, false);
    est.max(2.0 * l1(&y) / (3.0 * n as f64))
}

/// Restarted GMRES for `A x = b` with zero initial guess.
///
/// Stops when `‖b - A x‖ <= tol ‖b‖`; returns the iterate and the number of
/// operator applications.
pub fn gmres<F>(apply: F, b: &[Complex64], tol: f64, restart: usize, max_iter: usize) -> Result<(Vec<Complex64>, usize)>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut iters = 0;
    let mut r = b.to_vec();
    let mut rnorm = bnorm;
    while iters < max_iter {
        let m = restart.min(max_iter - iters).max(1);
        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|a| a / rnorm).collect());
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(rnorm, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&v[k])?;
            iters += 1;
            for (i, vi) in v.iter().enumerate() {
                let hik: Complex64 = vi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            k_used = k + 1;
            if g[k + 1].norm() <= tol * bnorm || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|a| a / wn).collect());
        }
        // Back substitution on the triangular system.
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vj) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vj;
            }
        }
        let ax = apply(&x)?;
        r = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        rnorm = norm(&r);
        log::debug!("gmres: {iters} applications, relative residual {:.3e}", rnorm / bnorm);
        if rnorm <= tol * bnorm {
            return Ok((x, iters));
        }
    }
    Err(Error::NonConvergence {
        iterations: iters,
        residual: rnorm / bnorm,
    })
}

/// Complex Givens rotation with real cosine zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Which quantity [`synthesize_field`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `χE^s`, from `J - J_inc`.
    ChiEScattered,
    /// `χE`, from `J`.
    ChiETotal,
    /// `E^s` itself, from `G J`. Unlike the contrast source it is continuous
    /// across the object boundary, so multiplying it by `χ` pointwise gives
    /// `χE^s` without the ringing of a band-limited jump.
    EScattered,
}

/// Evaluates `Σ c_mnk g_mn(x) Λ_k(z)` on the tensor grid `xs × zs`,
/// returned z-outer row-major.
pub fn synthesize_field(sol: &Solution, xs: &[f64], zs: &[f64], fp: &FrameParams, zg: &ZGrid, which: FieldKind) -> Vec<Complex64> {
    let c = match which {
        FieldKind::ChiETotal => sol.j.clone(),
        FieldKind::EScattered => sol.e_s.clone(),
        FieldKind::ChiEScattered => {
            let mut d = sol.j.clone();
            for (a, b) in d.data.iter_mut().zip(&sol.j_inc.data) {
                *a -= b;
            }
            d
        }
    };
    synthesize_tensor(&c, xs, zs, fp, zg)
}

/// Evaluates the expansion with coefficients `c` on `xs × zs`.
pub fn synthesize_tensor(c: &CoeffTensor, xs: &[f64], zs: &[f64], fp: &FrameParams, zg: &ZGrid) -> Vec<Complex64> {
    let ns = fp.per_slice();
    let basis: Vec<Complex64> = xs
        .iter()
        .flat_map(|&x| (0..ns).map(move |idx| {
            let (m, n) = fp.mn(idx);
            frame_element(x, m, n, fp)
        }))
        .collect();
    let mut out = Vec::with_capacity(xs.len() * zs.len());
    let mut slice = vec![Complex64::new(0.0, 0.0); ns];
    for &z in zs {
        slice.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let t = (z - zg.z_min) / zg.delta;
        let k0 = t.floor().max(0.0) as usize;
        for k in k0.saturating_sub(1)..=(k0 + 1).min(zg.n_k) {
            let w = zg.triangle(k, z);
            if w != 0.0 {
                for (s, v) in slice.iter_mut().zip(c.slice(k)) {
                    *s += v * w;
                }
            }
        }
        for i in 0..xs.len() {
            let row = &basis[i * ns..(i + 1) * ns];
            out.push(row.iter().zip(&slice).map(|(a, b)| a * b).sum());
        }
    }
    out
}
