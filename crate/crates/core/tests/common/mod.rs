//! Quadrature oracles and small helpers shared by the integration tests.
#![allow(dead_code)]

use gabor_ewald::frame::{frame_element, spectral_frame_element, FrameParams};
use gabor_ewald::quad::{integrate, Tolerance};
use gabor_ewald::Complex64;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn tight() -> Tolerance {
    Tolerance {
        rel: 1e-13,
        abs: 1e-300,
        max_panels: 20_000,
    }
}

fn quad(f: impl FnMut(f64) -> Complex64, breaks: &[f64]) -> Complex64 {
    quad_with(f, breaks, tight())
}

fn quad_with(f: impl FnMut(f64) -> Complex64, breaks: &[f64], tol: Tolerance) -> Complex64 {
    integrate(f, breaks, tol).expect("oracle quadrature").value
}

/// `∫∫ conj(g_{m2 n2}(x)) e^{-(x-x')²ξ²} g_{mn}(x') dx' dx` by nested quadrature.
pub fn spatial_pair(m: i64, n: i64, m2: i64, n2: i64, xi: f64, fp: &FrameParams) -> Complex64 {
    spatial_pair_tol(m, n, m2, n2, xi, fp, tight())
}

/// [`spatial_pair`] with a chosen tolerance for both levels.
pub fn spatial_pair_tol(m: i64, n: i64, m2: i64, n2: i64, xi: f64, fp: &FrameParams, tol: Tolerance) -> Complex64 {
    let x = fp.x_width;
    let reach = 7.0 * x;
    let c2 = m2 as f64 * fp.shift();
    let c1 = m as f64 * fp.shift();
    let outer = |xo: f64| -> Complex64 {
        let w = frame_element(xo, m2, n2, fp).conj();
        let (lo, hi) = (c1 - reach, c1 + reach);
        let mut br = vec![lo, hi];
        // The Gaussian kernel is narrow for large ξ; split at its centre and edges.
        let kern_width = 7.0 / xi;
        for v in [xo - kern_width, xo, xo + kern_width] {
            if v > lo && v < hi {
                br.push(v);
            }
        }
        br.sort_by(f64::total_cmp);
        br.dedup();
        w * quad_with(|xp| (-(xo - xp).powi(2) * xi * xi).exp() * frame_element(xp, m, n, fp), &br, tol)
    };
    quad_with(outer, &[c2 - reach, c2, c2 + reach], tol)
}

/// `∫ conj(ĝ_{n2 m2}(k)) e^{-k²ζ²/4} ĝ_{nm}(k) dk` by quadrature over real `k`.
pub fn spectral_pair(m: i64, n: i64, m2: i64, n2: i64, zeta: Complex64, fp: &FrameParams) -> Complex64 {
    let kk = fp.k();
    let mid = 0.5 * (n + n2) as f64 * fp.modulation();
    let reach = 4.0 * kk;
    let z2 = zeta * zeta;
    let breaks: Vec<f64> = (0..=64).map(|i| mid - reach + 2.0 * reach * i as f64 / 64.0).collect();
    quad(
        |k| {
            spectral_frame_element(k, n2, m2, fp).conj() * (-k * k * z2 / 4.0).exp() * spectral_frame_element(k, n, m, fp)
        },
        &breaks,
    )
}

/// `∫_0^Δ (1 - u/Δ) e^{-(dΔ + u)² / s²} du`, the defining integral of
/// the half-triangle factor.
pub fn half_triangle_oracle(d: i64, s: Complex64, delta: f64) -> Complex64 {
    let inv2 = (s * s).inv();
    let breaks: Vec<f64> = (0..=16).map(|i| delta * i as f64 / 16.0).collect();
    quad(
        |u| {
            let t = d as f64 * delta + u;
            (1.0 - u / delta) * (-t * t * inv2).exp()
        },
        &breaks,
    )
}

/// [`spectral_pair`] along the steepest-descent line of the integrand.
///
/// For complex `ζ` the Gaussian factor is a chirp and the real-axis
/// integral can cancel to far below the integrand size. Both frame factors
/// continue to entire functions of `k`, so the line `k* + t e^{jφ}` through
/// the saddle `k*` of the quadratic exponent carries the same value
/// without the cancellation.
pub fn spectral_pair_steepest(m: i64, n: i64, m2: i64, n2: i64, zeta: Complex64, fp: &FrameParams) -> Complex64 {
    let kk = fp.k();
    let (bk, ax) = (fp.beta * kk, fp.alpha * fp.x_width);
    let amp = 2f64.sqrt() * fp.x_width * fp.x_width;
    let j = Complex64::new(0.0, 1.0);
    let z2 = zeta * zeta;
    // exp(-a k² + b k + const)
    let a = 2.0 * PI / (kk * kk) + z2 / 4.0;
    let b = 2.0 * PI * bk * (n + n2) as f64 / (kk * kk) + j * ((m2 - m) as f64 * ax);
    let centre = b / (2.0 * a);
    let dir = Complex64::from_polar(1.0, -0.5 * a.arg());
    let integrand = |k: Complex64| -> Complex64 {
        let left = (-PI * (k - n2 as f64 * bk).powi(2) / (kk * kk) + j * (m2 as f64 * ax) * k).exp();
        let right = (-PI * (k - n as f64 * bk).powi(2) / (kk * kk) - j * (m as f64 * ax) * k).exp();
        amp * left * (-k * k * z2 / 4.0).exp() * right
    };
    let reach = 12.0 / a.norm().sqrt();
    let breaks: Vec<f64> = (0..=24).map(|i| -reach + 2.0 * reach * i as f64 / 24.0).collect();
    quad(|t| integrand(centre + dir * t) * dir, &breaks)
}
