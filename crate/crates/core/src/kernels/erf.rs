//! Error function of complex argument.
//!
//! Small arguments use power series (the Maclaurin series near the imaginary
//! axis, the Kummer form `e^{-z²} Σ (2z²)^n z / (2n+1)!!` near the real axis).
//! Larger arguments in the sector `|arg z| < 3π/8` go through the scaled
//! complement `erfcx(z) = e^{z²} erfc(z)` evaluated by its Laplace continued
//! fraction, so differences of nearly equal values keep their precision.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const SERIES_RADIUS: f64 = 2.5;
const OVERFLOW_EXPONENT: f64 = 700.0;

fn two_over_sqrt_pi() -> f64 {
    2.0 / PI.sqrt()
}

/// Maclaurin series, good when `Re z² <= 0` or `|z|` is small.
fn erf_maclaurin(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let nmax = (4.0 * z2.norm() + 60.0) as usize;
    for n in 1..nmax {
        term *= -z2 / n as f64;
        let t = term / (2 * n + 1) as f64;
        sum += t;
        if t.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * two_over_sqrt_pi()
}

/// Kummer-type series with positive terms on the real axis.
fn erf_kummer(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let nmax = (4.0 * z2.norm() + 60.0) as usize;
    for n in 1..nmax {
        term *= 2.0 * z2 / (2 * n + 1) as f64;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (-z2).exp() * two_over_sqrt_pi()
}

/// `e^{z²} erfc(z)` for `Re z > 0` by the continued fraction
/// `1/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`, modified Lentz.
fn erfcx_cf(z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..20000 {
        let a = n as f64 / 2.0;
        d = z + a * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = z + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    f.inv() / PI.sqrt()
}

/// Whether `z` (with `Re z >= 0`) is handled by the continued fraction.
fn use_cf(z: Complex64) -> bool {
    z.norm() > SERIES_RADIUS && z.im.abs() < z.re * (3.0 * PI / 8.0).tan()
}

/// Unchecked `erf(z)`; callers guarantee `Re z² > -700`.
pub(crate) fn erf_raw(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -erf_raw(-z);
    }
    if use_cf(z) {
        let z2 = z * z;
        return 1.0 - (-z2).exp() * erfcx_cf(z);
    }
    if (z * z).re > 0.0 {
        erf_kummer(z)
    } else {
        erf_maclaurin(z)
    }
}

/// Unchecked `erfc(z)` for `Re z >= 0`, accurate in relative terms where
/// the continued fraction applies.
pub(crate) fn erfc_right(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0);
    if use_cf(z) {
        (-z * z).exp() * erfcx_cf(z)
    } else {
        1.0 - erf_raw(z)
    }
}

/// The error function `erf(z) = 2/√π ∫_0^z e^{-t²} dt` for complex `z`.
///
/// Fails with [`Error::OverflowGuard`] when `e^{-z²}` would overflow.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) || -(z * z).re > OVERFLOW_EXPONENT {
        return Err(Error::OverflowGuard { re: z.re, im: z.im });
    }
    Ok(erf_raw(z))
}

/// `erf(a) - erf(b)` without cancellation when both arguments lie far out
/// in the same half of the continued-fraction sector.
pub fn erf_diff(a: Complex64, b: Complex64) -> Complex64 {
    if a.re >= 0.0 && b.re >= 0.0 && use_cf(a) && use_cf(b) {
        erfc_right(b) - erfc_right(a)
    } else if a.re <= 0.0 && b.re <= 0.0 && use_cf(-a) && use_cf(-b) {
        erfc_right(-a) - erfc_right(-b)
    } else {
        erf_raw(a) - erf_raw(b)
    }
}

/// `e^w - 1` without cancellation for small `|w|`.
pub(crate) fn expm1(w: Complex64) -> Complex64 {
    if w.norm() < 0.1 {
        let mut term = w;
        let mut sum = w;
        for n in 2..30 {
            term *= w / n as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        w.exp() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branches_agree_on_boundaries() {
        for k in 0..64 {
            let th = -1.5 + 3.0 * k as f64 / 63.0;
            for &r in &[SERIES_RADIUS - 1e-9, SERIES_RADIUS + 1e-9] {
                let z = Complex64::from_polar(r, th);
                let s = erf_maclaurin(z);
                let v = erf_raw(z);
                assert!((s - v).norm() <= 1e-12 * s.norm().max(1.0), "z={z}");
            }
        }
    }

    #[test]
    fn overflow_guard() {
        assert!(erf_complex(c(0.0, 30.0)).is_err());
        assert!(erf_complex(c(0.0, 20.0)).is_ok());
    }

    #[test]
    fn diff_of_far_tail() {
        // erfc(6) - erfc(6.5) is far below the spacing of doubles near 1.
        let d = erf_diff(c(6.5, 0.0), c(6.0, 0.0));
        assert!((d.re - 2.148_131_522_922_770_7e-17).abs() < 1e-28);
    }

    #[test]
    fn expm1_small() {
        let w = c(1e-10, -2e-10);
        assert!((expm1(w) - w).norm() < 1e-19);
    }
}
