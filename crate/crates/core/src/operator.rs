//! The discrete Green operator and the contrast-source system.
//!
//! For a source `J = Σ J_mnk g_mn(x) Λ_k(z)` the scattered field
//! coefficients at node `l` are
//!
//! ```text
//! E_st,l = k0² e^{-j2παβ st} Σ_mnk e^{j2παβ mn} J_mnk
//!          · [h1(k) W(m-s, n, t, k-l) + h2(k) W(m-s, n, t, l-k)]
//! ```
//!
//! with `h1(k) = [k < N_k]`, `h2(k) = [k > 0]` and
//!
//! ```text
//! W(r, n, t, d) = Σ_uv a*_uv e^{-j2παβ u(t+v)} e^{-(π/2)β²(n-t-v)²} T(r-u, n+t+v, d),
//! T(q, p, d)    = (X²/√π) T_spatial(q, p, d) + X √(2/π) T_spectral(-q, p, d).
//! ```
//!
//! The spectral table enters with `-q` because its Gaussian window product
//! is taken in the Fourier domain, where the transform of `g_mn` is
//! `e^{j2παβ mn} ĝ_nm`; that same phase turns the spectral coefficients back
//! into spatial ones, so both parts share the outer phase factors.

use crate::error::{Error, Result};
use crate::frame::{CoeffTensor, DualWindow, FrameOps, FrameParams};
use crate::kernels::ZGrid;
use crate::tables::{KernelTable, TableKind};
use faer::Mat;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default cap on the number of unknowns for dense assembly.
pub const DENSE_CAP: usize = 8000;

/// Everything needed to apply the discrete forward map.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub fp: FrameParams,
    pub zg: ZGrid,
    pub k0: f64,
    pub dual: DualWindow,
    /// Analysis and synthesis on the fine x grid used for contrast products.
    pub ops: FrameOps,
    /// `χ(x_i, z_l)` on `ops.grid` for each node `l`.
    pub chi_slices: Vec<Vec<f64>>,
    /// `W` stored as `[d][r][n][t]`.
    w: Vec<Complex64>,
    /// Per-slice contrast projections `c ↦ analyze(χ_l · synthesize(c))`.
    contrast: Vec<Option<Mat<Complex64>>>,
    /// `e^{j2παβ mn}` in slice order.
    phase: Vec<Complex64>,
}

impl DiscreteOperator {
    /// Combines the two tables with the dual-window coefficients.
    pub fn new(
        spatial: &KernelTable,
        spectral: &KernelTable,
        dual: &DualWindow,
        ops: FrameOps,
        zg: &ZGrid,
        chi_slices: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let fp = ops.params;
        if spatial.kind != TableKind::Spatial || spectral.kind != TableKind::Spectral {
            return Err(Error::DimensionMismatch("tables passed in the wrong order".into()));
        }
        for t in [spatial, spectral] {
            let m = &t.meta;
            if m.fp != fp || m.n_k != zg.n_k || (m.delta - zg.delta).abs() > 1e-15 * zg.delta {
                return Err(Error::DimensionMismatch(format!(
                    "{} table was built for a different frame or z grid",
                    t.kind.name()
                )));
            }
            if m.n_u != dual.n_u || m.n_v != dual.n_v {
                return Err(Error::DimensionMismatch(format!(
                    "{} table covers N_u={}, N_v={} but the dual window has N_u={}, N_v={}",
                    t.kind.name(),
                    m.n_u,
                    m.n_v,
                    dual.n_u,
                    dual.n_v
                )));
            }
        }
        if spatial.meta.cfg != spectral.meta.cfg {
            return Err(Error::DimensionMismatch("tables use different Ewald settings".into()));
        }
        if chi_slices.len() != zg.len() || chi_slices.iter().any(|c| c.len() != ops.grid.n) {
            return Err(Error::DimensionMismatch("contrast slices do not match the grids".into()));
        }
        let k0 = spatial.meta.cfg.k0;
        let w = combine_w(spatial, spectral, dual, &fp, zg.n_k);
        let contrast = chi_slices
            .iter()
            .map(|chi| {
                if chi.iter().all(|&c| c == 0.0) {
                    None
                } else {
                    Some(ops.weighted_projection(chi))
                }
            })
            .collect();
        let ns = fp.per_slice();
        let phase = (0..ns)
            .map(|idx| {
                let (m, n) = fp.mn(idx);
                Complex64::from_polar(1.0, 2.0 * PI * fp.alpha * fp.beta * (m * n) as f64)
            })
            .collect();
        Ok(DiscreteOperator {
            fp,
            zg: *zg,
            k0,
            dual: dual.clone(),
            ops,
            chi_slices,
            w,
            contrast,
            phase,
        })
    }

    /// Total number of unknowns `(2M+1)(2N+1)(N_k+1)`.
    pub fn unknowns(&self) -> usize {
        self.fp.per_slice() * self.zg.len()
    }

    fn w_block(&self, d: i64) -> &[Complex64] {
        let b = (4 * self.fp.m_max + 1) * (2 * self.fp.n_max + 1).pow(2);
        let i = (d + self.zg.n_k as i64) as usize;
        &self.w[i * b..(i + 1) * b]
    }

    /// `Σ_k [h1(k) W(·, k-l) + h2(k) W(·, l-k)]` for one `(l, k)` pair.
    fn coupling(&self, l: usize, k: usize, out: &mut [Complex64]) {
        let nk = self.zg.n_k;
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        if k < nk {
            for (o, w) in out.iter_mut().zip(self.w_block(k as i64 - l as i64)) {
                *o += w;
            }
        }
        if k > 0 {
            for (o, w) in out.iter_mut().zip(self.w_block(l as i64 - k as i64)) {
                *o += w;
            }
        }
    }

    fn check(&self, j: &CoeffTensor) -> Result<()> {
        j.check_shape(&self.fp, self.zg.n_k)
    }

    /// Scattered-field coefficients of the contrast source `j`.
    pub fn green_apply(&self, j: &CoeffTensor) -> Result<CoeffTensor> {
        self.check(j)?;
        let ns = self.fp.per_slice();
        let (mm, nn) = (self.fp.m_max as i64, self.fp.n_max as i64);
        let n2 = (2 * nn + 1) as usize;
        let jp: Vec<Complex64> = j
            .data
            .chunks(ns)
            .flat_map(|s| s.iter().zip(&self.phase).map(|(a, b)| a * b))
            .collect();
        let mut out = CoeffTensor::zeros(&self.fp, self.zg.n_k);
        let mut block = vec![Complex64::new(0.0, 0.0); self.w_block(0).len()];
        for l in 0..self.zg.len() {
            let mut acc = vec![Complex64::new(0.0, 0.0); ns];
            for k in 0..self.zg.len() {
                let src = &jp[k * ns..(k + 1) * ns];
                if src.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
                    continue;
                }
                self.coupling(l, k, &mut block);
                for s in -mm..=mm {
                    for m in -mm..=mm {
                        let r = (m - s + 2 * mm) as usize;
                        for n in 0..n2 {
                            let jv = src[(m + mm) as usize * n2 + n];
                            if jv.re == 0.0 && jv.im == 0.0 {
                                continue;
                            }
                            let wrow = &block[(r * n2 + n) * n2..(r * n2 + n + 1) * n2];
                            let arow = &mut acc[(s + mm) as usize * n2..(s + mm + 1) as usize * n2];
                            for (a, w) in arow.iter_mut().zip(wrow) {
                                *a += w * jv;
                            }
                        }
                    }
                }
            }
            let k2 = self.k0 * self.k0;
            for (o, (a, ph)) in out.slice_mut(l).iter_mut().zip(acc.iter().zip(&self.phase)) {
                *o = a * ph.conj() * k2;
            }
        }
        Ok(out)
    }

    /// Per-slice `analyze(χ(·, z_l) · synthesize(c_l))`.
    pub fn contrast_multiply(&self, c: &CoeffTensor) -> Result<CoeffTensor> {
        self.check(c)?;
        let mut out = CoeffTensor::zeros(&self.fp, self.zg.n_k);
        let ns = self.fp.per_slice();
        for l in 0..self.zg.len() {
            if let Some(cm) = &self.contrast[l] {
                let src = c.slice(l);
                let dst = out.slice_mut(l);
                for (r, d) in dst.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (col, s) in src.iter().enumerate().take(ns) {
                        acc += cm[(r, col)] * s;
                    }
                    *d = acc;
                }
            }
        }
        Ok(out)
    }

    /// Residual `J - J_inc - M_χ G J`.
    pub fn forward(&self, j: &CoeffTensor, j_inc: &CoeffTensor) -> Result<CoeffTensor> {
        self.check(j_inc)?;
        let mg = self.contrast_multiply(&self.green_apply(j)?)?;
        let mut r = j.clone();
        for ((v, a), b) in r.data.iter_mut().zip(&j_inc.data).zip(&mg.data) {
            *v -= a + b;
        }
        Ok(r)
    }

    /// `J ↦ J - M_χ G J`, the system operator without the right-hand side.
    pub fn apply_system(&self, j: &CoeffTensor) -> Result<CoeffTensor> {
        let mg = self.contrast_multiply(&self.green_apply(j)?)?;
        let mut r = j.clone();
        for (v, b) in r.data.iter_mut().zip(&mg.data) {
            *v -= b;
        }
        Ok(r)
    }

    /// Dense `I - M_χ G`, assembled one output slice at a time.
    pub fn assemble_dense(&self, cap: usize) -> Result<Mat<Complex64>> {
        let total = self.unknowns();
        if total > cap {
            return Err(Error::SizeCap { unknowns: total, cap });
        }
        let ns = self.fp.per_slice();
        let (mm, nn) = (self.fp.m_max as i64, self.fp.n_max as i64);
        let n2 = (2 * nn + 1) as usize;
        let k2 = self.k0 * self.k0;
        let mut a = Mat::<Complex64>::identity(total, total);
        let mut block = vec![Complex64::new(0.0, 0.0); self.w_block(0).len()];
        let mut g = Mat::<Complex64>::zeros(ns, total);
        for l in 0..self.zg.len() {
            let Some(cm) = &self.contrast[l] else {
                continue;
            };
            for k in 0..self.zg.len() {
                self.coupling(l, k, &mut block);
                for s in -mm..=mm {
                    for t in 0..n2 {
                        let row = (s + mm) as usize * n2 + t;
                        let out_ph = self.phase[row].conj() * k2;
                        for m in -mm..=mm {
                            let r = (m - s + 2 * mm) as usize;
                            for n in 0..n2 {
                                let col = (m + mm) as usize * n2 + n;
                                g[(row, k * ns + col)] = block[(r * n2 + n) * n2 + t] * self.phase[col] * out_ph;
                            }
                        }
                    }
                }
            }
            let mut rows = a.as_mut().subrows_mut(l * ns, ns);
            faer::linalg::matmul::matmul(
                rows.as_mut(),
                faer::Accum::Add,
                cm.as_ref(),
                g.as_ref(),
                Complex64::new(-1.0, 0.0),
                faer::Par::Seq,
            );
        }
        Ok(a)
    }
}

/// Builds `W(r, n, t, d)` from the tables and dual coefficients.
fn combine_w(spatial: &KernelTable, spectral: &KernelTable, dual: &DualWindow, fp: &FrameParams, n_k: usize) -> Vec<Complex64> {
    let x = fp.x_width;
    let cs = x * x / PI.sqrt();
    let cc = x * (2.0 / PI).sqrt();
    let (mm, nn) = (fp.m_max as i64, fp.n_max as i64);
    let (nu, nv) = (dual.n_u as i64, dual.n_v as i64);
    let nd = 2 * n_k + 1;
    let n2 = (2 * nn + 1) as usize;
    let nr = (4 * mm + 1) as usize;
    let block = nr * n2 * n2;
    let ab = fp.alpha * fp.beta;
    let mut w = vec![Complex64::new(0.0, 0.0); nd * block];
    for r in -2 * mm..=2 * mm {
        for n in -nn..=nn {
            for t in -nn..=nn {
                let base = (((r + 2 * mm) as usize) * n2 + (n + nn) as usize) * n2 + (t + nn) as usize;
                for u in -nu..=nu {
                    for v in -nv..=nv {
                        let a = dual.coeff(u, v).conj();
                        let gauss = (-0.5 * PI * fp.beta * fp.beta * ((n - t - v) * (n - t - v)) as f64).exp();
                        let ph = Complex64::from_polar(gauss, -2.0 * PI * ab * (u * (t + v)) as f64);
                        let coef = a * ph;
                        let q = r - u;
                        let p = n + t + v;
                        let rs = spatial.row(q, p);
                        let rc = spectral.row(-q, p);
                        for d in 0..nd {
                            w[d * block + base] += coef * (rs[d] * cs + rc[d] * cc);
                        }
                    }
                }
            }
        }
    }
    w
}
