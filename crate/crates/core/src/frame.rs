//! Gaussian Gabor frame along `x`.
//!
//! Frame elements are `g_mn(x) = g(x - mαX) e^{jβKnx}` with the window
//! `g(x) = 2^{1/4} e^{-πx²/X²}` and `K = 2π/X`. Expansion coefficients of a
//! signal are inner products with the dual elements `η_mn`, where the dual
//! window `η` is approximated by a short sum of frame elements.
//!
//! The canonical dual is obtained from the Walnut form of the frame operator,
//! `(S f)(x) = (X/β) Σ_k G_k(x) f(x - kX/β)` with
//! `G_k(x) = Σ_m g(x - mαX) g(x - mαX - kX/β)`. On a grid whose spacing
//! divides `X/β`, `S` splits into independent problems over the residue
//! classes of the grid index. For rational `αβ = P/Q` each of those problems
//! is `P`-periodic along the class and the Zak transform reduces it to small
//! `P × P` blocks.

use crate::error::{Error, Result};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

/// Constants of the Gabor frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    /// Window width `X` in metres.
    pub x_width: f64,
    /// Spatial oversampling rate.
    pub alpha: f64,
    /// Spectral oversampling rate.
    pub beta: f64,
    /// Largest `|m|`.
    pub m_max: usize,
    /// Largest `|n|`.
    pub n_max: usize,
}

impl FrameParams {
    /// Validated constructor; rejects `αβ >= 1`.
    pub fn new(x_width: f64, alpha: f64, beta: f64, m_max: usize, n_max: usize) -> Result<Self> {
        let fp = FrameParams {
            x_width,
            alpha,
            beta,
            m_max,
            n_max,
        };
        fp.validate()?;
        Ok(fp)
    }

    /// `X = 0.5`, `α = β = √(2/3)`, the setting of the bundled scenes.
    pub fn standard(m_max: usize, n_max: usize) -> Self {
        let a = (2.0f64 / 3.0).sqrt();
        FrameParams {
            x_width: 0.5,
            alpha: a,
            beta: a,
            m_max,
            n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_width > 0.0 && self.x_width.is_finite()) {
            return Err(Error::InvalidFrame(format!("window width X = {} must be positive", self.x_width)));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidFrame("alpha and beta must be positive".into()));
        }
        let ab = self.alpha * self.beta;
        if ab >= 1.0 {
            return Err(Error::InvalidFrame(format!(
                "alpha*beta = {ab} must be below 1 for an oversampled frame"
            )));
        }
        Ok(())
    }

    /// Spectral step `K = 2π/X`.
    pub fn k(&self) -> f64 {
        2.0 * PI / self.x_width
    }

    /// Spatial shift `αX`.
    pub fn shift(&self) -> f64 {
        self.alpha * self.x_width
    }

    /// Modulation step `βK`.
    pub fn modulation(&self) -> f64 {
        self.beta * self.k()
    }

    /// Number of `(m, n)` pairs, `(2M+1)(2N+1)`.
    pub fn per_slice(&self) -> usize {
        (2 * self.m_max + 1) * (2 * self.n_max + 1)
    }

    /// Position of `(m, n)` inside one z-slice of coefficients.
    pub fn index(&self, m: i64, n: i64) -> usize {
        let nn = 2 * self.n_max + 1;
        (m + self.m_max as i64) as usize * nn + (n + self.n_max as i64) as usize
    }

    /// Inverse of [`FrameParams::index`].
    pub fn mn(&self, idx: usize) -> (i64, i64) {
        let nn = 2 * self.n_max + 1;
        ((idx / nn) as i64 - self.m_max as i64, (idx % nn) as i64 - self.n_max as i64)
    }

    /// `αβ` as a reduced fraction `P/Q` with `Q <= 64`, if it is one.
    pub fn rational_density(&self) -> Option<(usize, usize)> {
        let ab = self.alpha * self.beta;
        for q in 1..=64usize {
            let p = (ab * q as f64).round();
            if p >= 1.0 && (ab * q as f64 - p).abs() < 1e-10 {
                return Some((p as usize, q));
            }
        }
        None
    }
}

/// Window `g(x) = 2^{1/4} e^{-πx²/X²}`.
pub fn window_value(x: f64, p: &FrameParams) -> f64 {
    FOURTH_ROOT_2 * (-PI * x * x / (p.x_width * p.x_width)).exp()
}

/// Frame element `g_mn(x)`.
pub fn frame_element(x: f64, m: i64, n: i64, p: &FrameParams) -> Complex64 {
    let w = window_value(x - m as f64 * p.shift(), p);
    Complex64::from_polar(w, p.modulation() * n as f64 * x)
}

/// Spectral frame element `ĝ_nm(k) = 2^{1/4} X e^{-π(k - nβK)²/K²} e^{-jmαXk}`.
///
/// With the transform `F(k) = ∫ f(x) e^{-jkx} dx` the transform of `g_mn`
/// equals `e^{j2παβmn} ĝ_nm`.
pub fn spectral_frame_element(kx: f64, n: i64, m: i64, p: &FrameParams) -> Complex64 {
    let k = p.k();
    let d = kx - n as f64 * p.modulation();
    let amp = FOURTH_ROOT_2 * p.x_width * (-PI * d * d / (k * k)).exp();
    Complex64::from_polar(amp, -(m as f64) * p.shift() * kx)
}

/// Uniform grid `x_i = x0 + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl XGrid {
    /// Grid through the origin with spacing `h` covering `[-half_width, half_width]`.
    pub fn symmetric(h: f64, half_width: f64) -> Self {
        let k = (half_width / h).ceil() as usize;
        XGrid {
            x0: -(k as f64) * h,
            h,
            n: 2 * k + 1,
        }
    }

    /// Default analysis grid: spacing `X/16` over
    /// `[-(M+2)αX - 4X, (M+2)αX + 4X]`.
    pub fn analysis(p: &FrameParams) -> Self {
        let half = (p.m_max as f64 + 2.0) * p.shift() + 4.0 * p.x_width;
        XGrid::symmetric(p.x_width / 16.0, half)
    }

    /// Grid whose spacing divides the modulation period `X/β` (and the shift
    /// `αX` when `αβ` is rational), with spacing at most `max_h`.
    pub fn lattice(p: &FrameParams, max_h: f64, half_width: f64) -> Self {
        let period = p.x_width / p.beta;
        let q = p.rational_density().map(|(_, q)| q).unwrap_or(1);
        let blocks = (period / (q as f64 * max_h)).ceil() as usize;
        XGrid::symmetric(period / (blocks * q) as f64, half_width)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// A real window sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWindow {
    pub grid: XGrid,
    pub values: Vec<f64>,
}

/// Anything that can serve as the dual window `η`.
pub trait Window: Sync {
    fn value(&self, x: f64) -> Complex64;
}

impl Window for SampledWindow {
    /// Exact sample when `x` is a grid point, cubic interpolation otherwise,
    /// zero outside the sampled range.
    fn value(&self, x: f64) -> Complex64 {
        let t = (x - self.grid.x0) / self.grid.h;
        let i = t.round();
        if (t - i).abs() < 1e-9 {
            return Complex64::new(
                if i >= 0.0 && (i as usize) < self.values.len() {
                    self.values[i as usize]
                } else {
                    0.0
                },
                0.0,
            );
        }
        let i0 = t.floor() as i64 - 1;
        let u = t - (i0 + 1) as f64;
        let at = |j: i64| {
            if j >= 0 && (j as usize) < self.values.len() {
                self.values[j as usize]
            } else {
                0.0
            }
        };
        let (y0, y1, y2, y3) = (at(i0), at(i0 + 1), at(i0 + 2), at(i0 + 3));
        let v = -u * (u - 1.0) * (u - 2.0) / 6.0 * y0 + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * y1
            - (u + 1.0) * u * (u - 2.0) / 2.0 * y2
            + (u + 1.0) * u * (u - 1.0) / 6.0 * y3;
        Complex64::new(v, 0.0)
    }
}

/// Checks that the grid spacing divides `X/β` and returns the number of
/// samples per modulation period.
fn samples_per_period(p: &FrameParams, grid: &XGrid) -> Result<usize> {
    let period = p.x_width / p.beta;
    let b = period / grid.h;
    let br = b.round();
    if br < 1.0 || (b - br).abs() > 1e-8 * br {
        return Err(Error::GridIncompatible(format!(
            "spacing {} does not divide the modulation period {period}",
            grid.h
        )));
    }
    Ok(br as usize)
}

/// `G_k(x) = Σ_m g(x - mαX) g(x - mαX - kX/β)`.
fn walnut_coefficient(x: f64, k: i64, p: &FrameParams) -> f64 {
    let a = p.shift();
    let tk = k as f64 * p.x_width / p.beta;
    let reach = 7.0 * p.x_width;
    let m_lo = ((x - tk - reach) / a).floor() as i64;
    let m_hi = ((x + reach) / a).ceil() as i64;
    (m_lo..=m_hi)
        .map(|m| {
            let y = x - m as f64 * a;
            window_value(y, p) * window_value(y - tk, p)
        })
        .sum()
}

/// Largest `|k|` with non-negligible `G_k`.
fn walnut_reach(p: &FrameParams) -> i64 {
    // g(y) g(y - kX/β) <= √2 e^{-π k² / (2β²)}.
    let kmax = (2.0 * 40.0 / PI).sqrt() * p.beta;
    kmax.ceil() as i64 + 1
}

/// Canonical dual window via the Zak transform.
///
/// The grid spacing must divide `X/β` and `αX`, and `αβ` must be a rational
/// number with a small denominator. The result is sampled on a grid with the
/// same spacing and origin over a symmetric range of roughly
/// `max(60X, half-width of grid)`.
pub fn zak_dual_window(p: &FrameParams, grid: &XGrid) -> Result<SampledWindow> {
    let (pp, qq) = p
        .rational_density()
        .ok_or_else(|| Error::GridIncompatible("alpha*beta is not a small rational".into()))?;
    let b = samples_per_period(p, grid)?;
    if (b * pp) % qq != 0 {
        return Err(Error::GridIncompatible(format!(
            "spacing {} does not divide the shift {}",
            grid.h,
            p.shift()
        )));
    }
    let period = p.x_width / p.beta;
    let h = grid.h;
    let half = (grid.n as f64 * h * 0.5).max(30.0 * p.x_width);
    // Number of P-periods along one residue class.
    let mut l = (2.0 * half / (pp as f64 * period)).ceil() as usize;
    l += l % 2;
    let len_class = l * pp; // samples per residue class
    let total = len_class * b;
    let reach = walnut_reach(p);
    let inv_b = period;

    // Samples of g on the periodic grid, index i <-> x = (i - total/2) h.
    let origin = -((total / 2) as f64) * h;
    let xpos = |i: usize| origin + i as f64 * h;
    let mut gamma = vec![0.0f64; total];
    let mut smin = f64::INFINITY;
    let mut smax = 0.0f64;
    for rho in 0..b {
        // Class positions ℓ = 0..len_class, x = xpos(rho + ℓ b).
        let coeff: Vec<Vec<f64>> = (0..pp)
            .map(|r| {
                let x = xpos(rho + r * b);
                (-reach..=reach).map(|k| inv_b * walnut_coefficient(x, k, p)).collect()
            })
            .collect();
        let gvals: Vec<f64> = (0..len_class)
            .map(|ell| {
                let x = xpos(rho + ell * b);
                // Periodised window.
                let span = total as f64 * h;
                (-2..=2).map(|w| window_value(x + w as f64 * span, p)).sum()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); len_class];
        let mut blocks = Vec::with_capacity(l);
        for it in 0..l {
            let theta = 2.0 * PI * it as f64 / l as f64;
            let mut s = Mat::<Complex64>::zeros(pp, pp);
            for r in 0..pp {
                for (ki, k) in (-reach..=reach).enumerate() {
                    let c = coeff[r][ki];
                    let diff = r as i64 - k;
                    let rp = diff.rem_euclid(pp as i64);
                    let nu = (diff - rp) / pp as i64;
                    s[(r, rp as usize)] += Complex64::from_polar(c, theta * nu as f64);
                }
            }
            let mut gz = vec![Complex64::new(0.0, 0.0); pp];
            for (mu, chunk) in gvals.chunks(pp).enumerate() {
                let ph = Complex64::from_polar(1.0, -theta * mu as f64);
                for r in 0..pp {
                    gz[r] += chunk[r] * ph;
                }
            }
            let svd = s.thin_svd().map_err(|_| Error::SingularFrame { sigma: 0.0 })?;
            let sv = svd.S().column_vector();
            for i in 0..pp {
                smin = smin.min(sv[i].re);
                smax = smax.max(sv[i].re);
            }
            blocks.push((svd, gz));
        }
        if smin < 1e-12 * smax {
            return Err(Error::SingularFrame { sigma: smin / smax });
        }
        for (it, (svd, gz)) in blocks.iter().enumerate() {
            let theta = 2.0 * PI * it as f64 / l as f64;
            let u = svd.U();
            let v = svd.V();
            let sv = svd.S().column_vector();
            // Γ = V Σ^{-1} U^H G
            let mut tmp = vec![Complex64::new(0.0, 0.0); pp];
            for j in 0..pp {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..pp {
                    acc += u[(r, j)].conj() * gz[r];
                }
                tmp[j] = acc / sv[j].re;
            }
            for r in 0..pp {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..pp {
                    acc += v[(r, j)] * tmp[j];
                }
                for mu in 0..l {
                    out[mu * pp + r] += acc * Complex64::from_polar(1.0 / l as f64, theta * mu as f64);
                }
            }
        }
        for (ell, v) in out.iter().enumerate() {
            gamma[rho + ell * b] = v.re;
        }
    }
    Ok(SampledWindow {
        grid: XGrid {
            x0: origin,
            h,
            n: total,
        },
        values: gamma,
    })
}

/// Canonical dual window by a direct dense solve of the truncated frame
/// operator on each residue class. Works for any `αβ < 1`; the grid spacing
/// only has to divide `X/β`.
pub fn dense_dual_window(p: &FrameParams, grid: &XGrid, half_width: f64) -> Result<SampledWindow> {
    let b = samples_per_period(p, grid)?;
    let h = grid.h;
    let period = p.x_width / p.beta;
    let per_class = (2.0 * half_width / period).ceil() as usize + 1;
    let total = per_class * b;
    let origin = -((total / 2) as f64) * h;
    let reach = walnut_reach(p);
    let mut gamma = vec![0.0f64; total];
    for rho in 0..b {
        let xs: Vec<f64> = (0..per_class).map(|l| origin + (rho + l * b) as f64 * h).collect();
        let n = xs.len();
        let mut s = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for k in -reach..=reach {
                let j = i as i64 - k;
                if j >= 0 && (j as usize) < n {
                    s[(i, j as usize)] += period * walnut_coefficient(xs[i], k, p);
                }
            }
        }
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| window_value(xs[i], p));
        let sv = s.singular_values().map_err(|_| Error::SingularFrame { sigma: 0.0 })?;
        let ratio = sv[n - 1] / sv[0];
        if ratio < 1e-12 {
            return Err(Error::SingularFrame { sigma: ratio });
        }
        let lu = s.partial_piv_lu();
        let x = faer::linalg::solvers::Solve::solve(&lu, &rhs);
        for i in 0..n {
            gamma[rho + i * b] = x[(i, 0)];
        }
    }
    Ok(SampledWindow {
        grid: XGrid { x0: origin, h, n: total },
        values: gamma,
    })
}

/// Dual window approximated as `η(x) = Σ_uv a_uv g_uv(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWindow {
    pub n_u: usize,
    pub n_v: usize,
    /// Coefficients in `u`-major order, `(u + N_u)(2N_v+1) + (v + N_v)`.
    pub a: Vec<Complex64>,
    /// Relative L2 misfit against the sampled canonical dual.
    pub residual: f64,
    /// Condition number of the normal equations of the fit.
    pub condition: f64,
    /// Whether the fit fell back to a truncated SVD.
    pub truncated: bool,
    params: FrameParams,
}

impl DualWindow {
    pub fn coeff(&self, u: i64, v: i64) -> Complex64 {
        let nv = 2 * self.n_v + 1;
        self.a[(u + self.n_u as i64) as usize * nv + (v + self.n_v as i64) as usize]
    }

    pub fn params(&self) -> &FrameParams {
        &self.params
    }

    /// Rebuilds a dual window from stored coefficients.
    pub fn from_coeffs(p: &FrameParams, n_u: usize, n_v: usize, a: Vec<Complex64>) -> Self {
        DualWindow {
            n_u,
            n_v,
            a,
            residual: 0.0,
            condition: 1.0,
            truncated: false,
            params: *p,
        }
    }
}

impl Window for DualWindow {
    fn value(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for u in -(self.n_u as i64)..=self.n_u as i64 {
            for v in -(self.n_v as i64)..=self.n_v as i64 {
                acc += self.coeff(u, v) * frame_element(x, u, v, &self.params);
            }
        }
        acc
    }
}

/// Least-squares fit of `η ≈ Σ_uv a_uv g_uv` to a sampled dual window.
///
/// When the normal equations are worse conditioned than `1e12` the solution
/// is taken from an SVD truncated at that level and `truncated` is set.
pub fn fit_dual_coeffs(eta: &SampledWindow, n_u: usize, n_v: usize, p: &FrameParams) -> Result<DualWindow> {
    let xs = eta.grid.points();
    let nv = 2 * n_v + 1;
    let cols = (2 * n_u + 1) * nv;
    let rows = xs.len();
    let a = Mat::<Complex64>::from_fn(rows, cols, |i, j| {
        let u = (j / nv) as i64 - n_u as i64;
        let v = (j % nv) as i64 - n_v as i64;
        frame_element(xs[i], u, v, p)
    });
    let svd = a.thin_svd().map_err(|_| Error::Domain("SVD of the fit matrix failed".into()))?;
    let s = svd.S().column_vector();
    let smax = s[0].re;
    let smin = s[cols - 1].re;
    let condition = (smax / smin).powi(2);
    let truncated = condition > 1e12;
    let cut = if truncated { smax * 1e-6 } else { 0.0 };
    let u = svd.U();
    let v = svd.V();
    let mut coef = vec![Complex64::new(0.0, 0.0); cols];
    for j in 0..cols {
        let sj = s[j].re;
        if sj <= cut {
            continue;
        }
        let mut proj = Complex64::new(0.0, 0.0);
        for i in 0..rows {
            proj += u[(i, j)].conj() * eta.values[i];
        }
        proj /= sj;
        for (c, k) in coef.iter_mut().zip(0..cols) {
            *c += v[(k, j)] * proj;
        }
    }
    if truncated {
        log::warn!("dual-window fit is ill conditioned ({condition:.3e}); using a truncated SVD");
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..rows {
        let mut fit = Complex64::new(0.0, 0.0);
        for j in 0..cols {
            fit += a[(i, j)] * coef[j];
        }
        num += (fit - eta.values[i]).norm_sqr();
        den += eta.values[i] * eta.values[i];
    }
    Ok(DualWindow {
        n_u,
        n_v,
        a: coef,
        residual: (num / den).sqrt(),
        condition,
        truncated,
        params: *p,
    })
}

/// Canonical dual through the Zak route when possible, dense otherwise,
/// sampled at about `X/16` and fitted with `N_u`, `N_v` terms.
pub fn default_dual(p: &FrameParams, n_u: usize, n_v: usize) -> Result<(SampledWindow, DualWindow)> {
    let grid = XGrid::lattice(p, p.x_width / 16.0, 30.0 * p.x_width);
    let eta = match zak_dual_window(p, &grid) {
        Ok(w) => w,
        Err(Error::GridIncompatible(_)) => dense_dual_window(p, &grid, 30.0 * p.x_width)?,
        Err(e) => return Err(e),
    };
    let dw = fit_dual_coeffs(&eta, n_u, n_v, p)?;
    Ok((eta, dw))
}

/// Analysis and synthesis operators between samples on an [`XGrid`] and
/// coefficients `(m, n)` of one z-slice.
#[derive(Debug, Clone)]
pub struct FrameOps {
    pub grid: XGrid,
    pub params: FrameParams,
    /// `synth[i * per_slice + idx] = g_mn(x_i)`.
    synth: Vec<Complex64>,
    /// `anal[idx * n + i] = h · conj(η_mn(x_i))`.
    anal: Vec<Complex64>,
}

impl FrameOps {
    pub fn new(p: &FrameParams, grid: XGrid, dual: &dyn Window) -> Result<Self> {
        if grid.h > p.x_width / 8.0 {
            return Err(Error::GridTooCoarse {
                spacing: grid.h,
                limit: p.x_width / 8.0,
            });
        }
        let ns = p.per_slice();
        let xs = grid.points();
        let mut synth = vec![Complex64::new(0.0, 0.0); xs.len() * ns];
        let mut anal = vec![Complex64::new(0.0, 0.0); xs.len() * ns];
        let a = p.shift();
        let bk = p.modulation();
        for idx in 0..ns {
            let (m, n) = p.mn(idx);
            for (i, &x) in xs.iter().enumerate() {
                synth[i * ns + idx] = frame_element(x, m, n, p);
                let eta = dual.value(x - m as f64 * a) * Complex64::from_polar(1.0, bk * n as f64 * x);
                anal[idx * xs.len() + i] = eta.conj() * grid.h;
            }
        }
        Ok(FrameOps {
            grid,
            params: *p,
            synth,
            anal,
        })
    }

    /// Coefficients `⟨f, η_mn⟩` of a sampled signal.
    pub fn analyze(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n;
        assert_eq!(f.len(), n, "signal length must match the grid");
        (0..self.params.per_slice())
            .map(|idx| {
                let row = &self.anal[idx * n..(idx + 1) * n];
                row.iter().zip(f).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Samples of `Σ c_mn g_mn` on the grid.
    pub fn synthesize(&self, c: &[Complex64]) -> Vec<Complex64> {
        let ns = self.params.per_slice();
        assert_eq!(c.len(), ns, "coefficient count must match the frame");
        (0..self.grid.n)
            .map(|i| {
                let row = &self.synth[i * ns..(i + 1) * ns];
                row.iter().zip(c).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Dense matrix of `c ↦ analyze(χ · synthesize(c))` for real weights `chi`.
    pub fn weighted_projection(&self, chi: &[f64]) -> Mat<Complex64> {
        let ns = self.params.per_slice();
        let n = self.grid.n;
        let active: Vec<usize> = (0..n).filter(|&i| chi[i] != 0.0).collect();
        let mut out = Mat::<Complex64>::zeros(ns, ns);
        if active.is_empty() {
            return out;
        }
        let left = Mat::<Complex64>::from_fn(ns, active.len(), |r, j| self.anal[r * n + active[j]] * chi[active[j]]);
        let right = Mat::<Complex64>::from_fn(active.len(), ns, |j, c| self.synth[active[j] * ns + c]);
        faer::linalg::matmul::matmul(
            out.as_mut(),
            faer::Accum::Replace,
            left.as_ref(),
            right.as_ref(),
            Complex64::new(1.0, 0.0),
            faer::Par::Seq,
        );
        out
    }
}

/// Coefficients of a sampled signal, `f_mn = ⟨f, η_mn⟩`.
pub fn analyze(f: &[Complex64], grid: &XGrid, dual: &dyn Window, p: &FrameParams) -> Result<Vec<Complex64>> {
    Ok(FrameOps::new(p, *grid, dual)?.analyze(f))
}

/// Samples of `Σ c_mn g_mn(x)` on `grid`.
pub fn synthesize(c: &[Complex64], grid: &XGrid, p: &FrameParams) -> Vec<Complex64> {
    let ns = p.per_slice();
    assert_eq!(c.len(), ns, "coefficient count must match the frame");
    grid.points()
        .iter()
        .map(|&x| (0..ns).map(|idx| {
            let (m, n) = p.mn(idx);
            c[idx] * frame_element(x, m, n, p)
        }).sum())
        .collect()
}

/// Coefficients `J_{mn,k}` over the frame indices and the z nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    pub m_max: usize,
    pub n_max: usize,
    pub n_k: usize,
    /// Slice-major storage: `data[k * per_slice + FrameParams::index(m, n)]`.
    pub data: Vec<Complex64>,
}

impl CoeffTensor {
    pub fn zeros(p: &FrameParams, n_k: usize) -> Self {
        CoeffTensor {
            m_max: p.m_max,
            n_max: p.n_max,
            n_k,
            data: vec![Complex64::new(0.0, 0.0); p.per_slice() * (n_k + 1)],
        }
    }

    pub fn per_slice(&self) -> usize {
        (2 * self.m_max + 1) * (2 * self.n_max + 1)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, m: i64, n: i64, k: usize) -> usize {
        let nn = 2 * self.n_max + 1;
        k * self.per_slice() + (m + self.m_max as i64) as usize * nn + (n + self.n_max as i64) as usize
    }

    pub fn get(&self, m: i64, n: i64, k: usize) -> Complex64 {
        self.data[self.offset(m, n, k)]
    }

    pub fn set(&mut self, m: i64, n: i64, k: usize, v: Complex64) {
        let o = self.offset(m, n, k);
        self.data[o] = v;
    }

    pub fn slice(&self, k: usize) -> &[Complex64] {
        let s = self.per_slice();
        &self.data[k * s..(k + 1) * s]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [Complex64] {
        let s = self.per_slice();
        &mut self.data[k * s..(k + 1) * s]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Whether two tensors share a shape.
    pub fn same_shape(&self, other: &CoeffTensor) -> bool {
        self.m_max == other.m_max && self.n_max == other.n_max && self.n_k == other.n_k
    }

    pub fn check_shape(&self, p: &FrameParams, n_k: usize) -> Result<()> {
        if self.m_max != p.m_max || self.n_max != p.n_max || self.n_k != n_k {
            return Err(Error::DimensionMismatch(format!(
                "tensor (M={}, N={}, N_k={}) against frame (M={}, N={}) and N_k={}",
                self.m_max, self.n_max, self.n_k, p.m_max, p.n_max, n_k
            )));
        }
        Ok(())
    }
}
