//! The 2D Helmholtz Green function and its Ewald split.
//!
//! With the `e^{jωt}` convention the Green function is
//! `G(R) = (1/4j) H0^(2)(k0 R) = (1/2π) ∫_0^∞ e^{-R²ξ² + k0²/(4ξ²)} / ξ dξ`
//! along a contour that leaves the origin at 45°. Splitting the integral at
//! `ξ = ℰ` gives a spatial part over `[ℰ, ∞)` that decays like a Gaussian in
//! `R` and a spectral part over `(0, ℰ]` that is smooth in `R`.
//!
//! The spectral part is evaluated in the variable `ζ = 1/ξ`, which runs from
//! `1/ℰ` along an arc to the ray `(1 - j)w/2`. Past a point `ζ_W` on that
//! ray the contour is rotated to the direction `e^{j5π/4}`, where
//! `Re ζ²` falls linearly and the integrand decays exponentially.

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::special;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of the Ewald split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwaldConfig {
    /// Splitting parameter `ℰ` in 1/m.
    pub split: f64,
    /// Background wavenumber in 1/m.
    pub k0: f64,
    /// Relative quadrature tolerance.
    pub quad_tol: f64,
    /// Integrand magnitude below which contributions are dropped.
    pub trunc_tol: f64,
}

impl EwaldConfig {
    pub fn new(split: f64, k0: f64, quad_tol: f64, trunc_tol: f64) -> Result<Self> {
        let cfg = EwaldConfig {
            split,
            k0,
            quad_tol,
            trunc_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default tolerances with `ℰ` from [`optimal_split`].
    pub fn optimal(k0: f64, delta: f64) -> Result<Self> {
        EwaldConfig::new(optimal_split(k0, delta), k0, 1e-10, 1e-14)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split.is_finite()) {
            return Err(Error::Domain(format!("split {} must be positive", self.split)));
        }
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return Err(Error::Domain(format!("k0 {} must be positive", self.k0)));
        }
        for (name, v) in [("quad_tol", self.quad_tol), ("trunc_tol", self.trunc_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.quad_tol,
            abs: 0.0,
            max_panels: 20_000,
        }
    }
}

/// `ℰ = 2^{-1/4} √(k0/Δ)`, which balances `Δ²ℰ² = k0²/(2ℰ²)`.
pub fn optimal_split(k0: f64, delta: f64) -> f64 {
    (k0 / delta).sqrt() / 2f64.powf(0.25)
}

/// `(1/4j) H0^(2)(k0 R)`.
pub fn green_exact(r: f64, k0: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("Green function needs R > 0, got {r}")));
    }
    let x = k0 * r;
    Ok(Complex64::new(-special::y0(x) / 4.0, -special::j0(x) / 4.0))
}

/// Ewald contour in `ξ`: `(1+j)w`, then `w + (ℰ - w)j`, then the real axis.
pub fn xi_path(w: f64, split: f64) -> Complex64 {
    if w <= 0.5 * split {
        Complex64::new(w, w)
    } else if w <= split {
        Complex64::new(w, split - w)
    } else {
        Complex64::new(w, 0.0)
    }
}

/// `dξ/dw` along [`xi_path`].
pub fn xi_path_derivative(w: f64, split: f64) -> Complex64 {
    if w < 0.5 * split {
        Complex64::new(1.0, 1.0)
    } else if w < split {
        Complex64::new(1.0, -1.0)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Contour in `ζ = 1/ξ(1/w)` for `w >= 1/ℰ`: an arc of a circle from `1/ℰ`
/// to `(1-j)/ℰ`, then the ray `(1-j)w/2`.
pub fn zeta_path(w: f64, split: f64) -> Complex64 {
    if w <= 2.0 / split {
        let e = split * w - 1.0;
        Complex64::new(w, -(split * w * w - w)) / (1.0 + e * e)
    } else {
        Complex64::new(w, -w) * 0.5
    }
}

/// `dζ/dw` along [`zeta_path`].
pub fn zeta_path_derivative(w: f64, split: f64) -> Complex64 {
    if w < 2.0 / split {
        let den = Complex64::new(1.0, split * w - 1.0);
        Complex64::new(1.0, -1.0) / (den * den)
    } else {
        Complex64::new(0.5, -0.5)
    }
}

/// Direction of the rotated tail of the `ζ` contour.
pub(crate) fn tail_direction() -> Complex64 {
    Complex64::from_polar(1.0, 1.25 * PI)
}

/// Breakpoints on `[a, b]` so that each panel spans at most half a period
/// of a phase whose derivative is bounded by `rate(w)`.
pub(crate) fn phase_blocks(a: f64, b: f64, rate: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![a];
    let mut w = a;
    let max_step = (b - a) / 4.0;
    while w < b {
        let step = (PI / rate(w).max(1e-300)).min(max_step);
        w = (w + step).min(b);
        if b - w < 0.25 * step {
            w = b;
        }
        out.push(w);
    }
    out
}

/// Spatial part `(1/2π) ∫_ℰ^∞ e^{-R²ξ² + k0²/(4ξ²)} / ξ dξ`.
///
/// The integral runs in `u = ln ξ` up to where `R²ξ²` exceeds the decay
/// needed for `trunc_tol`. At `R = 0` it is cut at `ξ = 100ℰ`.
pub fn green_spatial(dx: f64, dz: f64, cfg: &EwaldConfig) -> Result<Complex64> {
    cfg.validate()?;
    let r2 = dx * dx + dz * dz;
    let e = cfg.split;
    let k2 = cfg.k0 * cfg.k0;
    let decay = -cfg.trunc_tol.ln() + k2 / (4.0 * e * e) + 5.0;
    let xi_max = if r2 > 0.0 {
        (decay / r2).sqrt().max(2.0 * e)
    } else {
        100.0 * e
    };
    let (a, b) = (e.ln(), xi_max.ln());
    let n = ((b - a) / 0.5).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let f = |u: f64| {
        let xi = u.exp();
        let xi2 = xi * xi;
        Complex64::new((-r2 * xi2 + k2 / (4.0 * xi2)).exp(), 0.0)
    };
    let r = quad::integrate(f, &breaks, cfg.tolerance())?;
    Ok(r.value / (2.0 * PI))
}

/// Spectral part `(1/2π) ∫_0^ℰ e^{-R²ξ² + k0²/(4ξ²)} / ξ dξ` along the Ewald
/// contour, computed as `(1/2π) ∫ e^{-R²/ζ² + k0²ζ²/4} / ζ dζ` over the
/// `ζ` contour.
pub fn green_spectral(dx: f64, dz: f64, cfg: &EwaldConfig) -> Result<Complex64> {
    cfg.validate()?;
    let r2 = dx * dx + dz * dz;
    if r2 == 0.0 {
        return Err(Error::Domain("spectral part is singular at R = 0".into()));
    }
    let r = r2.sqrt();
    let e = cfg.split;
    let k0 = cfg.k0;
    let k2 = k0 * k0;
    let integrand = |zeta: Complex64| ((-r2) / (zeta * zeta) + k2 * zeta * zeta / 4.0).exp() / zeta;
    let tol = cfg.tolerance();

    let arc = quad::integrate(
        |w| integrand(zeta_path(w, e)) * zeta_path_derivative(w, e),
        &[1.0 / e, 1.5 / e, 2.0 / e],
        tol,
    )?;

    let w_end = (6.0 * (r / k0).sqrt()).max(r).max(4.0 / e);
    let breaks = phase_blocks(2.0 / e, w_end, |w| 4.0 * r2 / (w * w * w) + k2 * w / 4.0);
    let dz_ray = Complex64::new(0.5, -0.5);
    let ray = quad::integrate(|w| integrand(Complex64::new(w, -w) * 0.5) * dz_ray, &breaks, tol)?;

    let zeta_w = Complex64::new(w_end, -w_end) * 0.5;
    let dir = tail_direction();
    let rate = k2 * 2f64.sqrt() * w_end / 4.0;
    let s_end = (-cfg.trunc_tol.ln() + 10.0) / rate;
    let tail_breaks: Vec<f64> = (0..=8).map(|i| s_end * (i as f64 / 8.0).powi(2)).collect();
    let tail = quad::integrate(|s| integrand(zeta_w + dir * s) * dir, &tail_breaks, tol)?;

    Ok((arc.value + ray.value + tail.value) / (2.0 * PI))
}
