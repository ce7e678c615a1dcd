//! Bessel and Hankel functions of real argument.
//!
//! Integer-order Bessel functions of the first kind come from Miller's
//! backward recurrence normalised by `J0 + 2 Σ J_2k = 1`. The second kind
//! uses Neumann series built on the same recurrence for `x < 25` and the
//! Hankel asymptotic expansion beyond.

use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const ASYMPTOTIC_X: f64 = 25.0;

/// Returns `[J_0(x), ..., J_nmax(x)]` for `x >= 0`.
pub fn bessel_j_array(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = x.abs();
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // j holds J_k, jp1 holds J_{k+1}; step down to J_{k-1}.
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        let km1 = k - 1;
        if km1 <= nmax {
            out[km1] = j;
        }
        if km1 > 0 && km1 % 2 == 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Hankel asymptotic expansion returning `(J_nu(x), Y_nu(x))` for large `x`.
fn hankel_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (nu / 2.0 + 0.25) * PI;
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `J_0(x)`.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x >= ASYMPTOTIC_X {
        hankel_asymptotic(0.0, x).0
    } else {
        bessel_j_array(x, 0)[0]
    }
}

/// `J_1(x)`.
pub fn j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    s * if x >= ASYMPTOTIC_X {
        hankel_asymptotic(1.0, x).0
    } else {
        bessel_j_array(x, 1)[1]
    }
}

/// `(Y_0(x), Y_1(x))` for `x > 0`.
pub fn y0_y1(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "Y_n requires a positive argument");
    if x >= ASYMPTOTIC_X {
        return (hankel_asymptotic(0.0, x).1, hankel_asymptotic(1.0, x).1);
    }
    let kmax = ((x + 30.0) as usize) / 2 + 10;
    let j = bessel_j_array(x, 2 * kmax + 1);
    let lg = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=kmax {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
    }
    let y0 = 2.0 / PI * (lg * j[0] + 2.0 * s0);
    let y1 = 2.0 / PI * (lg * j[1] - j[0] / x - s1);
    (y0, y1)
}

/// `Y_0(x)` for `x > 0`.
pub fn y0(x: f64) -> f64 {
    y0_y1(x).0
}

/// `Y_1(x)` for `x > 0`.
pub fn y1(x: f64) -> f64 {
    y0_y1(x).1
}

/// Returns `[J_0..J_nmax]` and `[Y_0..Y_nmax]` for `x > 0`.
pub fn bessel_jy_arrays(x: f64, nmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = bessel_j_array(x, nmax.max(1));
    let (y0, y1) = y0_y1(x);
    let mut y = vec![0.0; nmax.max(1) + 1];
    y[0] = y0;
    y[1] = y1;
    for n in 1..nmax.max(1) {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }
    j.truncate(nmax + 1);
    y.truncate(nmax + 1);
    (j, y)
}

/// Hankel function of the second kind `H_0^(2)(x) = J_0 - j Y_0`.
pub fn hankel2_0(x: f64) -> Complex64 {
    let (y0, _) = y0_y1(x);
    Complex64::new(j0(x), -y0)
}

/// Hankel function of the second kind `H_1^(2)(x) = J_1 - j Y_1`.
pub fn hankel2_1(x: f64) -> Complex64 {
    let (_, y1) = y0_y1(x);
    Complex64::new(j1(x), -y1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_limits() {
        assert_eq!(j0(0.0), 1.0);
        assert_eq!(j1(0.0), 0.0);
        let x = 1e-6;
        assert!((y0(x) - 2.0 / PI * ((x / 2.0).ln() + EULER_GAMMA)).abs() < 1e-10);
    }

    #[test]
    fn wronskian_holds() {
        for &x in &[0.01, 0.5, 3.7, 12.0, 24.9, 25.1, 80.0] {
            let (y0, y1) = y0_y1(x);
            let w = j1(x) * y0 - j0(x) * y1;
            assert!((w - 2.0 / (PI * x)).abs() < 1e-13 * (1.0 + 2.0 / (PI * x)), "x={x}");
        }
    }

    #[test]
    fn continuity_at_switch() {
        // The two sides differ by the step times the derivatives
        // Y0' = -Y1 and Y1' = Y0 - Y1/x.
        let (x, h) = (ASYMPTOTIC_X, 1e-9);
        let a = y0_y1(x - h);
        let b = y0_y1(x + h);
        assert!((a.0 - (b.0 + 2.0 * h * b.1)).abs() < 1e-12);
        assert!((a.1 - (b.1 - 2.0 * h * (b.0 - b.1 / x))).abs() < 1e-12);
    }
}
