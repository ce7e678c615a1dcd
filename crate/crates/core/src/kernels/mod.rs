//! Closed-form factors of the reduced coupling integrals.
//!
//! After the `x` integrals are done against Gaussian windows and the `z`
//! integrals against half triangles, the spatial and spectral parts of the
//! Green operator reduce to one-dimensional integrals over the Ewald path
//! variable. The factors here are the integrands of those integrals:
//!
//! * `f(q, p, ξ)` and `f̃(q, p, ζ)` from the Gaussian window products,
//! * `g(d, ξ)` and `g̃(d, ζ)` from one half of a triangle function,
//! * `h` and `h̃`, which combine half triangles into full or boundary ones.

mod erf;

pub use erf::{erf_complex, erf_diff};
pub(crate) use erf::{erf_raw, erfc_right, expm1};

use crate::error::{Error, Result};
use crate::frame::FrameParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform node grid in `z` carrying the triangle functions `Λ_0..Λ_{N_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub delta: f64,
    pub n_k: usize,
}

impl ZGrid {
    /// Builds a grid from its extent and spacing, checking that the spacing
    /// divides the extent.
    pub fn new(z_min: f64, z_max: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !(z_max > z_min) {
            return Err(Error::Domain(format!(
                "z grid needs z_max > z_min and delta > 0 (got {z_min}, {z_max}, {delta})"
            )));
        }
        let n = (z_max - z_min) / delta;
        let n_k = n.round();
        if n_k < 1.0 || (n - n_k).abs() > 1e-9 * n_k.max(1.0) {
            return Err(Error::Domain(format!(
                "z extent {} is not a whole number of spacings {delta}",
                z_max - z_min
            )));
        }
        Ok(ZGrid {
            z_min,
            z_max: z_min + n_k * delta,
            delta,
            n_k: n_k as usize,
        })
    }

    /// Grid of `n_k` spacings centred on `z = 0`.
    pub fn centered(delta: f64, n_k: usize) -> Self {
        let half = 0.5 * n_k as f64 * delta;
        ZGrid {
            z_min: -half,
            z_max: -half + n_k as f64 * delta,
            delta,
            n_k,
        }
    }

    /// Node position `z_l`.
    pub fn node(&self, l: usize) -> f64 {
        self.z_min + l as f64 * self.delta
    }

    /// Number of triangle functions, `N_k + 1`.
    pub fn len(&self) -> usize {
        self.n_k + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Triangle function `Λ_k(z)`.
    pub fn triangle(&self, k: usize, z: f64) -> f64 {
        let t = (z - self.node(k)).abs() / self.delta;
        if t >= 1.0 {
            return 0.0;
        }
        // Boundary triangles are halves; nothing exists outside the grid.
        if (k == 0 && z < self.z_min) || (k == self.n_k && z > self.z_max) {
            return 0.0;
        }
        1.0 - t
    }
}

/// `f(q, p, ξ)`, the Gaussian-window factor of the spatial part.
pub fn f_spatial(q: i64, p: i64, xi: Complex64, fp: &FrameParams) -> Complex64 {
    let x = fp.x_width;
    let xi2 = xi * xi;
    let c = PI / (2.0 + PI / (x * x * xi2));
    let s = Complex64::new(fp.alpha * q as f64, fp.beta * p as f64);
    let pre = (4.0 * x * x * xi2 + 2.0 * PI).sqrt().inv();
    pre * (-c * s * s - 0.5 * PI * (fp.beta * p as f64).powi(2)).exp()
}

/// `f̃(q, p, ζ)`, the Gaussian-window factor of the spectral part.
///
/// The prefactor `√(π/(K²ζ²+8π))` is continued analytically along the
/// whole path, including the rotated tail where `K²ζ²+8π` crosses the
/// negative real axis.
pub fn f_spectral(q: i64, p: i64, zeta: Complex64, fp: &FrameParams) -> Complex64 {
    let k = fp.k();
    let z2 = zeta * zeta;
    let den = k * k * z2 + 8.0 * PI;
    let c = 4.0 * PI * PI / den;
    let s = Complex64::new(fp.beta * p as f64, fp.alpha * q as f64);
    spectral_prefactor(zeta, k) * (c * s * s - 0.5 * PI * (fp.beta * p as f64).powi(2)).exp()
}

/// Analytic continuation of `√(π/(K²ζ²+8π))` from the positive real axis.
pub(crate) fn spectral_prefactor(zeta: Complex64, k: f64) -> Complex64 {
    if zeta.norm() * k < 8.0 {
        (PI / (k * k * zeta * zeta + 8.0 * PI)).sqrt()
    } else {
        let r = 1.0 + 8.0 * PI / (k * k * zeta * zeta);
        PI.sqrt() / (k * zeta * r.sqrt())
    }
}

/// `∫_0^Δ (1 - u/Δ) e^{-(dΔ + u)²/s²} du`: one half triangle of
/// height one seen through a Gaussian of width `s` at offset `d` spacings.
///
/// The spatial factor is `g(d, ξ) = half_triangle(d, 1/ξ)` and the spectral
/// factor is `g̃(d, ζ) = half_triangle(d, ζ)`.
pub fn half_triangle(d: i64, s: Complex64, delta: f64) -> Complex64 {
    let inv = s.inv() * delta;
    let j = if d >= 0 { d } else { -d - 1 };
    let lo = inv * j as f64;
    let hi = inv * (j + 1) as f64;
    // erf((d+1)Δ/s) - erf(dΔ/s), identical for d and -d-1.
    let ediff = erf_diff(hi, lo);
    let a = (d + 1) as f64;
    let term1 = a * 0.5 * PI.sqrt() * s * ediff;
    let term2 = s * s / (2.0 * delta) * gauss_diff(d + 1, d, inv);
    term1 + term2
}

/// `e^{-a²r²} - e^{-b²r²}` for integers `a`, `b` with `r = Δ/s`.
fn gauss_diff(a: i64, b: i64, r: Complex64) -> Complex64 {
    let r2 = r * r;
    let (lo, hi, sgn) = if a.abs() <= b.abs() { (a, b, 1.0) } else { (b, a, -1.0) };
    // e^{-lo² r²} (1 - e^{-(hi² - lo²) r²}) with the larger exponent factored out.
    let base = (-r2 * (lo * lo) as f64).exp();
    let d = (hi * hi - lo * lo) as f64;
    -sgn * base * expm1(-r2 * d)
}

/// `g(d, ξ)` for the spatial part.
pub fn g_z_spatial(d: i64, xi: Complex64, zg: &ZGrid) -> Complex64 {
    half_triangle(d, xi.inv(), zg.delta)
}

/// `g̃(d, ζ)` for the spectral part.
pub fn g_z_spectral(d: i64, zeta: Complex64, zg: &ZGrid) -> Complex64 {
    half_triangle(d, zeta, zg.delta)
}

/// Combines half triangles into `Λ_k` for observation node `l`.
fn combine(k: i64, l: i64, zg: &ZGrid, g: impl Fn(i64) -> Complex64) -> Result<Complex64> {
    let n = zg.n_k as i64;
    if k < 0 || k > n || l < 0 || l > n {
        return Err(Error::Index { q: k, p: l, d: k - l });
    }
    let mut v = Complex64::new(0.0, 0.0);
    if k < n {
        v += g(k - l);
    }
    if k > 0 {
        v += g(l - k);
    }
    Ok(v)
}

/// `h(k, l, ξ) = ∫ Λ_k(z') e^{-(z_l - z')² ξ²} dz'`.
pub fn h_z_spatial(k: i64, l: i64, xi: Complex64, zg: &ZGrid) -> Result<Complex64> {
    combine(k, l, zg, |d| g_z_spatial(d, xi, zg))
}

/// `h̃(k, l, ζ) = ∫ Λ_k(z') e^{-(z_l - z')²/ζ²} dz'`.
pub fn h_z_spectral(k: i64, l: i64, zeta: Complex64, zg: &ZGrid) -> Result<Complex64> {
    combine(k, l, zg, |d| g_z_spectral(d, zeta, zg))
}

/// Values of `half_triangle(d, s)` for `d = -n_k ..= n_k`, sharing the
/// error-function evaluations between neighbouring offsets.
pub(crate) fn half_triangle_row(n_k: usize, s: Complex64, delta: f64, out: &mut [Complex64]) {
    let n = n_k as i64;
    debug_assert_eq!(out.len(), 2 * n_k + 1);
    let r = s.inv() * delta;
    let r2 = r * r;
    // erfc(jΔ/s) for j = 0..=n+1, relative accuracy in the far tail.
    let mut cfn = Vec::with_capacity(n_k + 2);
    let mut gauss = Vec::with_capacity(n_k + 2);
    for j in 0..=(n + 1) {
        let a = r * j as f64;
        cfn.push(if a.re >= 0.0 { erfc_right(a) } else { 1.0 - erf_raw(a) });
        gauss.push((-r2 * (j * j) as f64).exp());
    }
    let half_sqrt_pi = 0.5 * PI.sqrt();
    let s2 = s * s / (2.0 * delta);
    for d in -n..=n {
        let j = if d >= 0 { d } else { -d - 1 } as usize;
        let ediff = if r.re >= 0.0 {
            cfn[j] - cfn[j + 1]
        } else {
            erf_raw(r * (j + 1) as f64) - erf_raw(r * j as f64)
        };
        let a = (d + 1) as f64;
        let (lo, hi) = if (d + 1).abs() <= d.abs() { (d + 1, d) } else { (d, d + 1) };
        let dd = (hi * hi - lo * lo) as f64;
        let gd = gauss[lo.unsigned_abs() as usize] * expm1(-r2 * dd);
        // e^{-(d+1)²r²} - e^{-d²r²}
        let gdiff = if (d + 1).abs() <= d.abs() { -gd } else { gd };
        out[(d + n) as usize] = a * half_sqrt_pi * s * ediff + s2 * gdiff;
    }
}
