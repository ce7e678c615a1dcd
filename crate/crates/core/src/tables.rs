//! Kernel tables: the one-dimensional path integrals over `(q, p, d)`.
//!
//! The spatial table holds
//! `T(q, p, d) = ∫_ℰ^∞ e^{k0²/(4ξ²)}/ξ · f(q, p, ξ) · g(d, ξ) dξ`,
//! evaluated in `t = 1/ξ` over `(0, 1/ℰ]` where the integrand vanishes
//! linearly at `t = 0`. The spectral table holds
//! `T̃(q, p, d) = ∫ e^{k0²ζ²/4} f̃(q, p, ζ) g̃(d, ζ) dζ` along the `ζ`
//! contour from `1/ℰ`: the arc, the ray up to `w = 200/ℰ` in half-period
//! blocks of the phase, and the rotated tail beyond it.
//!
//! Both kernels are even under `(q, p) → (-q, -p)`, so only half of the
//! `(q, p)` plane is integrated and the other half is mirrored.
//!
//! # Cache file layout
//!
//! All numbers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `EGKT` |
//! | 4 | `u32` format version (1) |
//! | 4 | `u32` kind, 0 spatial, 1 spectral |
//! | 64 | `f64` X, α, β, Δ, k0, ℰ, quad_tol, trunc_tol |
//! | 28 | `u32` M, N, N_k, N_u, N_v, Q, P |
//! | 16·n | `f64` pairs (re, im), row-major over q ∈ [-Q, Q], p ∈ [-P, P], d ∈ [-N_k, N_k] |
//!
//! Files are named by the SHA-256 of the 100 header bytes after the magic
//! and version.

use crate::error::{Error, Result};
use crate::frame::FrameParams;
use crate::green::{phase_blocks, tail_direction, zeta_path, zeta_path_derivative, EwaldConfig};
use crate::kernels::{half_triangle_row, spectral_prefactor, ZGrid};
use crate::quad::{self, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"EGKT";
const VERSION: u32 = 1;

/// Which part of the Ewald split a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    Spatial,
    Spectral,
}

impl TableKind {
    fn code(self) -> u32 {
        match self {
            TableKind::Spatial => 0,
            TableKind::Spectral => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TableKind::Spatial => "spatial",
            TableKind::Spectral => "spectral",
        }
    }
}

/// Everything a table depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub fp: FrameParams,
    pub delta: f64,
    pub n_k: usize,
    pub cfg: EwaldConfig,
    pub n_u: usize,
    pub n_v: usize,
}

impl TableMeta {
    pub fn new(fp: &FrameParams, zg: &ZGrid, cfg: &EwaldConfig, n_u: usize, n_v: usize) -> Self {
        TableMeta {
            fp: *fp,
            delta: zg.delta,
            n_k: zg.n_k,
            cfg: *cfg,
            n_u,
            n_v,
        }
    }

    /// Largest `|q|`, `2M + 2N_u`.
    pub fn q_max(&self) -> usize {
        2 * self.fp.m_max + 2 * self.n_u
    }

    /// Largest `|p|`, `2N + 2N_v`.
    pub fn p_max(&self) -> usize {
        2 * self.fp.n_max + 2 * self.n_v
    }

    fn header(&self, kind: TableKind) -> Vec<u8> {
        let mut h = Vec::with_capacity(96);
        h.extend_from_slice(&kind.code().to_le_bytes());
        for v in [
            self.fp.x_width,
            self.fp.alpha,
            self.fp.beta,
            self.delta,
            self.cfg.k0,
            self.cfg.split,
            self.cfg.quad_tol,
            self.cfg.trunc_tol,
        ] {
            h.extend_from_slice(&v.to_le_bytes());
        }
        for v in [
            self.fp.m_max,
            self.fp.n_max,
            self.n_k,
            self.n_u,
            self.n_v,
            self.q_max(),
            self.p_max(),
        ] {
            h.extend_from_slice(&(v as u32).to_le_bytes());
        }
        h
    }

    /// Hex SHA-256 content key of a table of this kind.
    pub fn cache_key(&self, kind: TableKind) -> String {
        let digest = Sha256::digest(self.header(kind));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Complex table over `q ∈ [-Q, Q]`, `p ∈ [-P, P]`, `d ∈ [-N_k, N_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub kind: TableKind,
    pub meta: TableMeta,
    pub data: Vec<Complex64>,
}

impl KernelTable {
    pub fn q_max(&self) -> usize {
        self.meta.q_max()
    }

    pub fn p_max(&self) -> usize {
        self.meta.p_max()
    }

    pub fn n_k(&self) -> usize {
        self.meta.n_k
    }

    fn shape(meta: &TableMeta) -> (usize, usize, usize) {
        (2 * meta.q_max() + 1, 2 * meta.p_max() + 1, 2 * meta.n_k + 1)
    }

    #[inline]
    pub(crate) fn offset(&self, q: i64, p: i64, d: i64) -> usize {
        let (_, np, nd) = Self::shape(&self.meta);
        ((q + self.q_max() as i64) as usize * np + (p + self.p_max() as i64) as usize) * nd
            + (d + self.meta.n_k as i64) as usize
    }

    /// Entry `(q, p, d)`.
    pub fn get(&self, q: i64, p: i64, d: i64) -> Result<Complex64> {
        if q.unsigned_abs() as usize > self.q_max()
            || p.unsigned_abs() as usize > self.p_max()
            || d.unsigned_abs() as usize > self.meta.n_k
        {
            return Err(Error::Index { q, p, d });
        }
        Ok(self.data[self.offset(q, p, d)])
    }

    /// Row of all `d` for fixed `(q, p)`, indexed by `d + N_k`.
    pub(crate) fn row(&self, q: i64, p: i64) -> &[Complex64] {
        let o = self.offset(q, p, -(self.meta.n_k as i64));
        &self.data[o..o + 2 * self.meta.n_k + 1]
    }

    /// Writes the table in the `EGKT` format.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.meta.header(self.kind))?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for v in &self.data {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a table written by [`KernelTable::write_to`].
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Cache("bad magic bytes".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Cache(format!("unsupported format version {version}")));
        }
        let kind = match read_u32(&mut r)? {
            0 => TableKind::Spatial,
            1 => TableKind::Spectral,
            k => return Err(Error::Cache(format!("unknown table kind {k}"))),
        };
        let mut f = [0.0f64; 8];
        for v in f.iter_mut() {
            *v = read_f64(&mut r)?;
        }
        let mut u = [0usize; 7];
        for v in u.iter_mut() {
            *v = read_u32(&mut r)? as usize;
        }
        let meta = TableMeta {
            fp: FrameParams {
                x_width: f[0],
                alpha: f[1],
                beta: f[2],
                m_max: u[0],
                n_max: u[1],
            },
            delta: f[3],
            n_k: u[2],
            cfg: EwaldConfig {
                k0: f[4],
                split: f[5],
                quad_tol: f[6],
                trunc_tol: f[7],
            },
            n_u: u[3],
            n_v: u[4],
        };
        if meta.q_max() != u[5] || meta.p_max() != u[6] {
            return Err(Error::Cache("index bounds inconsistent with the frame".into()));
        }
        let (a, b, c) = Self::shape(&meta);
        let n = a * b * c;
        let mut bytes = vec![0u8; n * 16];
        r.read_exact(&mut bytes)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Cache("trailing bytes after table data".into()));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(KernelTable { kind, meta, data })
    }

    /// Saves to `dir/<key>.egkt` and returns the path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = cache_path(dir, self.kind, &self.meta);
        let tmp = path.with_extension("egkt.tmp");
        {
            let file = std::fs::File::create(&tmp)?;
            let mut w = std::io::BufWriter::new(file);
            self.write_to(&mut w)?;
            w.flush()?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads a cached table, checking that it was built with `meta`.
    pub fn load(dir: &Path, kind: TableKind, meta: &TableMeta) -> Result<Option<Self>> {
        let path = cache_path(dir, kind, meta);
        if !path.exists() {
            return Ok(None);
        }
        let file = std::fs::File::open(&path)?;
        let t = KernelTable::read_from(std::io::BufReader::new(file))?;
        if t.kind != kind || t.meta.header(kind) != meta.header(kind) {
            return Err(Error::Cache(format!("{} does not match its key", path.display())));
        }
        Ok(Some(t))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Path of the cache file for a table.
pub fn cache_path(dir: &Path, kind: TableKind, meta: &TableMeta) -> PathBuf {
    dir.join(format!("{}.egkt", meta.cache_key(kind)))
}

/// Loads both tables from `dir` or builds and stores them. The flag tells
/// whether both came from the cache.
pub fn load_or_build(dir: Option<&Path>, meta: &TableMeta) -> Result<(KernelTable, KernelTable, bool)> {
    let zg = ZGrid::centered(meta.delta, meta.n_k);
    let mut hit = true;
    let mut get = |kind: TableKind| -> Result<KernelTable> {
        if let Some(d) = dir {
            match KernelTable::load(d, kind, meta) {
                Ok(Some(t)) => return Ok(t),
                Ok(None) => {}
                Err(e) => log::warn!("ignoring unusable {} table cache: {e}", kind.name()),
            }
        }
        hit = false;
        let t = match kind {
            TableKind::Spatial => build_spatial_table(&meta.fp, &zg, &meta.cfg, meta.n_u, meta.n_v)?,
            TableKind::Spectral => build_spectral_table(&meta.fp, &zg, &meta.cfg, meta.n_u, meta.n_v)?,
        };
        if let Some(d) = dir {
            t.save(d)?;
        }
        Ok(t)
    };
    let s = get(TableKind::Spatial)?;
    let t = get(TableKind::Spectral)?;
    Ok((s, t, hit))
}

/// Half of the `(q, p)` plane: `q > 0`, or `q = 0` and `p >= 0`.
fn half_plane(q_max: usize, p_max: usize) -> Vec<(i64, i64)> {
    let (qm, pm) = (q_max as i64, p_max as i64);
    let mut out = Vec::new();
    for q in 0..=qm {
        for p in -pm..=pm {
            if q > 0 || p >= 0 {
                out.push((q, p));
            }
        }
    }
    out
}

/// Real-ξ version of the exponent of `f(q, p, ξ)` without the prefactor.
fn f_exponent(q: i64, p: i64, c: Complex64, fp: &FrameParams) -> Complex64 {
    let s = Complex64::new(fp.alpha * q as f64, fp.beta * p as f64);
    -c * s * s - 0.5 * PI * (fp.beta * p as f64).powi(2)
}

/// Shared machinery of the two table builds. `eval(τ, fvals, grow)` must
/// write the `(q, p)` factors for every pair of `pairs` into `fvals` and the
/// `d` row into `grow`; the integrand of entry `(pair, d)` is their product.
struct VecBuild<'a> {
    kind: TableKind,
    meta: &'a TableMeta,
    pairs: Vec<(i64, i64)>,
}

impl<'a> VecBuild<'a> {
    fn run<E>(&self, eval: E, breaks: &[f64], envelope_nodes: &[f64]) -> Result<KernelTable>
    where
        E: Fn(f64, &mut [Complex64], &mut [Complex64]),
    {
        let meta = self.meta;
        let nk = meta.n_k;
        let nd = 2 * nk + 1;
        let npairs = self.pairs.len();
        let tol = meta.cfg.trunc_tol;

        // Envelope of each entry: max |integrand| times the parameter span
        // it is spread over. Entries below trunc_tol are left at zero.
        let span = breaks[breaks.len() - 1] - breaks[0];
        let mut env = vec![0.0f64; npairs * nd];
        let mut fv = vec![Complex64::new(0.0, 0.0); npairs];
        let mut gv = vec![Complex64::new(0.0, 0.0); nd];
        for &x in envelope_nodes {
            eval(x, &mut fv, &mut gv);
            for (i, f) in fv.iter().enumerate() {
                let fa = f.norm();
                for (j, g) in gv.iter().enumerate() {
                    let v = fa * g.norm() * span;
                    let e = &mut env[i * nd + j];
                    if v > *e || v.is_nan() {
                        *e = v;
                    }
                }
            }
        }
        let active: Vec<(usize, usize)> = (0..npairs)
            .flat_map(|i| (0..nd).map(move |j| (i, j)))
            .filter(|&(i, j)| !(env[i * nd + j] < tol))
            .collect();
        log::debug!(
            "{} table: {} of {} half-plane entries above truncation",
            self.kind.name(),
            active.len(),
            npairs * nd
        );

        let (qm, pm) = (meta.q_max(), meta.p_max());
        let mut table = KernelTable {
            kind: self.kind,
            meta: *meta,
            data: vec![Complex64::new(0.0, 0.0); (2 * qm + 1) * (2 * pm + 1) * nd],
        };
        if active.is_empty() {
            return Ok(table);
        }
        let qtol = Tolerance {
            rel: meta.cfg.quad_tol,
            abs: tol,
            max_panels: 20_000,
        };
        let pairs = &self.pairs;
        let integrand = |x: f64, out: &mut [Complex64]| {
            let mut fv = vec![Complex64::new(0.0, 0.0); npairs];
            let mut gv = vec![Complex64::new(0.0, 0.0); nd];
            eval(x, &mut fv, &mut gv);
            for (o, &(i, j)) in out.iter_mut().zip(&active) {
                *o = fv[i] * gv[j];
            }
        };
        let label = |k: usize| {
            let (i, j) = active[k];
            let (q, p) = pairs[i];
            format!("{} table entry (q={q}, p={p}, d={})", self.kind.name(), j as i64 - nk as i64)
        };
        let res = quad::integrate_vec_labeled(integrand, active.len(), breaks, qtol, label)?;
        for (k, &(i, j)) in active.iter().enumerate() {
            let (q, p) = pairs[i];
            let d = j as i64 - nk as i64;
            let v = res.values[k];
            if !v.is_finite() {
                return Err(Error::QuadratureFailure {
                    context: label(k),
                    error: f64::INFINITY,
                    tolerance: meta.cfg.quad_tol,
                });
            }
            let o = table.offset(q, p, d);
            table.data[o] = v;
            let o = table.offset(-q, -p, d);
            table.data[o] = v;
        }
        Ok(table)
    }
}

/// Builds the spatial table.
pub fn build_spatial_table(
    fp: &FrameParams,
    zg: &ZGrid,
    cfg: &EwaldConfig,
    n_u: usize,
    n_v: usize,
) -> Result<KernelTable> {
    fp.validate()?;
    cfg.validate()?;
    let meta = TableMeta::new(fp, zg, cfg, n_u, n_v);
    let pairs = half_plane(meta.q_max(), meta.p_max());
    let x = fp.x_width;
    let k2 = cfg.k0 * cfg.k0;
    let t_max = 1.0 / cfg.split;
    let nk = zg.n_k;
    let delta = zg.delta;
    let fpc = *fp;
    let pv = pairs.clone();
    // Integrand in t = 1/ξ: e^{k0² t²/4} f(q, p, 1/t) g(d, 1/t) / t.
    let eval = move |t: f64, fv: &mut [Complex64], gv: &mut [Complex64]| {
        if t <= 0.0 {
            fv.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            gv.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            return;
        }
        let pre = (k2 * t * t / 4.0).exp() / (4.0 * x * x + 2.0 * PI * t * t).sqrt();
        let c = Complex64::new(PI / (2.0 + PI * t * t / (x * x)), 0.0);
        for (v, &(q, p)) in fv.iter_mut().zip(&pv) {
            *v = pre * f_exponent(q, p, c, &fpc).exp();
        }
        half_triangle_row(nk, Complex64::new(t, 0.0), delta, gv);
    };
    let breaks: Vec<f64> = std::iter::once(0.0)
        .chain((0..=8).rev().map(|i| t_max / 2f64.powi(i)))
        .collect();
    let nodes: Vec<f64> = (1..=200).map(|i| t_max * i as f64 / 200.0).collect();
    VecBuild {
        kind: TableKind::Spatial,
        meta: &meta,
        pairs,
    }
    .run(eval, &breaks, &nodes)
}

/// End of the explicitly integrated part of the spectral ray.
pub fn spectral_ray_end(cfg: &EwaldConfig) -> f64 {
    200.0 / cfg.split
}

/// Builds the spectral table.
pub fn build_spectral_table(
    fp: &FrameParams,
    zg: &ZGrid,
    cfg: &EwaldConfig,
    n_u: usize,
    n_v: usize,
) -> Result<KernelTable> {
    fp.validate()?;
    cfg.validate()?;
    let meta = TableMeta::new(fp, zg, cfg, n_u, n_v);
    let pairs = half_plane(meta.q_max(), meta.p_max());
    let e = cfg.split;
    let k = fp.k();
    let k2 = cfg.k0 * cfg.k0;
    let nk = zg.n_k;
    let delta = zg.delta;
    let w_end = spectral_ray_end(cfg);
    let zeta_w = Complex64::new(w_end, -w_end) * 0.5;
    let dir = tail_direction();
    // Decay rate of e^{k0²ζ²/4} along the rotated tail.
    let rate = k2 * 2f64.sqrt() * w_end / 4.0;
    let s_end = (-cfg.trunc_tol.ln() + 10.0) / rate;

    // Parameter τ: arc on [1/ℰ, 2/ℰ], ray on [2/ℰ, W], tail s = τ - W.
    let path = move |tau: f64| -> (Complex64, Complex64) {
        if tau <= w_end {
            (zeta_path(tau, e), zeta_path_derivative(tau, e))
        } else {
            (zeta_w + dir * (tau - w_end), dir)
        }
    };
    let fpc = *fp;
    let pv = pairs.clone();
    let eval = move |tau: f64, fv: &mut [Complex64], gv: &mut [Complex64]| {
        let (zeta, dzeta) = path(tau);
        let z2 = zeta * zeta;
        let pre = (k2 * z2 / 4.0).exp() * spectral_prefactor(zeta, k) * dzeta;
        let c = 4.0 * PI * PI / (k * k * z2 + 8.0 * PI);
        for (v, &(q, p)) in fv.iter_mut().zip(&pv) {
            let s = Complex64::new(fpc.beta * p as f64, fpc.alpha * q as f64);
            *v = pre * (c * s * s - 0.5 * PI * (fpc.beta * p as f64).powi(2)).exp();
        }
        half_triangle_row(nk, zeta, delta, gv);
    };

    let a2 = fp.alpha * fp.alpha * (meta.q_max() as f64).powi(2) + fp.beta * fp.beta * (meta.p_max() as f64).powi(2);
    let lead = 16.0 * PI * PI * a2 / (k * k) + 4.0 * (nk as f64 * delta).powi(2);
    let mut breaks: Vec<f64> = (0..=4).map(|i| (1.0 + 0.25 * i as f64) / e).collect();
    let ray = phase_blocks(2.0 / e, w_end, |w| k2 * w / 4.0 + lead / (w * w * w));
    breaks.extend_from_slice(&ray[1..]);
    breaks.extend((1..=6).map(|i| w_end + s_end * (i as f64 / 6.0).powi(2)));

    // Envelope nodes: the arc, a geometric sweep of the ray, the tail start.
    let mut nodes: Vec<f64> = (0..=40).map(|i| (1.0 + i as f64 / 40.0) / e).collect();
    let n_ray = 200;
    nodes.extend((1..=n_ray).map(|i| (2.0 / e) * (w_end * e / 2.0).powf(i as f64 / n_ray as f64)));
    nodes.push(w_end + 0.5 * s_end);
    VecBuild {
        kind: TableKind::Spectral,
        meta: &meta,
        pairs,
    }
    .run(eval, &breaks, &nodes)
}

/// Parameter beyond which the large-argument envelope of an entry's
/// integrand is below `trunc_tol`.
///
/// For the spatial kind this is a value of `ξ` in `[ℰ, 100ℰ]`, using
/// `√π/(4Xξ³)` for `d = 0`, `1/(4XΔξ⁴)` for `d = -1`,
/// `e^{-d²Δ²ξ²}/(4dXΔξ⁴)` for `d >= 1` and `e^{-j²Δ²ξ²}/(8j²XΔ³ξ⁶)` with
/// `j = -d-1` for `d <= -2`, all times `e^{-πα²q²/2}`. The last case
/// differs from the `d >= 1` one because the nearest end of the half
/// triangle is the one where it vanishes. For the
/// spectral kind it is a value of `w` in `[2/ℰ, 200/ℰ]` from the envelope
/// `√(2π)Δ/(2√2 K w) e^{-πβ²p²/2}`.
pub fn truncation_point(kind: TableKind, q: i64, p: i64, d: i64, fp: &FrameParams, zg: &ZGrid, cfg: &EwaldConfig) -> f64 {
    let tol = cfg.trunc_tol;
    let e = cfg.split;
    match kind {
        TableKind::Spatial => {
            let x = fp.x_width;
            let dl = zg.delta;
            let qf = (-PI * fp.alpha * fp.alpha * (q * q) as f64 / 2.0).exp();
            let env = |xi: f64| -> f64 {
                qf * match d {
                    0 => PI.sqrt() / (4.0 * x * xi.powi(3)),
                    -1 => 1.0 / (4.0 * x * dl * xi.powi(4)),
                    d if d > 0 => {
                        let dd = d as f64;
                        (-(dd * dl * xi).powi(2)).exp() / (4.0 * dd * x * dl * xi.powi(4))
                    }
                    _ => {
                        let j = (-d - 1) as f64;
                        (-(j * dl * xi).powi(2)).exp() / (8.0 * j * j * x * dl.powi(3) * xi.powi(6))
                    }
                }
            };
            let hi = 100.0 * e;
            if env(e) <= tol {
                return e;
            }
            if env(hi) > tol {
                return hi;
            }
            // The envelope is decreasing; bisect in log ξ.
            let (mut a, mut b) = (e.ln(), hi.ln());
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if env(m.exp()) > tol {
                    a = m;
                } else {
                    b = m;
                }
            }
            b.exp()
        }
        TableKind::Spectral => {
            let k = fp.k();
            let amp = (2.0 * PI).sqrt() * zg.delta / (2.0 * 2f64.sqrt() * k)
                * (-PI * fp.beta * fp.beta * (p * p) as f64 / 2.0).exp();
            (amp / tol).clamp(2.0 / e, 200.0 / e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_plane_covers_plane_once() {
        let h = half_plane(3, 2);
        assert_eq!(h.len(), (7 * 5 + 1) / 2);
        for &(q, p) in &h {
            assert!(!h.contains(&(-q, -p)) || (q == 0 && p == 0));
        }
    }
}
