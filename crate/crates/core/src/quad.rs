//! Adaptive Gauss–Kronrod quadrature for complex integrands on real
//! parameter intervals.
//!
//! Contour integrals are handled by the caller folding the path Jacobian into
//! the integrand. The vector integrator refines one shared set of panels for
//! many integrands at once, which is how the kernel tables are built.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Nodes of the 21-point Kronrod rule on `[a, b]` with Kronrod and Gauss
/// weights (the Gauss weight is zero at Kronrod-only nodes).
fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64, f64); 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 21];
    let mut i = 0;
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[i] = (c - h * XGK[j], WGK[j] * h, wg);
        out[i + 1] = (c + h * XGK[j], WGK[j] * h, wg);
        i += 2;
    }
    out[20] = (c, WGK[10] * h, 0.0);
    out
}

/// Converts the raw Kronrod/Gauss difference into the usual error estimate.
fn scaled_error(raw: f64, resabs: f64) -> f64 {
    let floor = 50.0 * f64::EPSILON * resabs;
    let e = if resabs > 0.0 && raw > 0.0 {
        resabs * (200.0 * raw / resabs).powf(1.5).min(1.0)
    } else {
        raw
    };
    e.max(floor)
}

/// One application of the 21-point Gauss–Kronrod rule.
///
/// Returns `(integral, error estimate, integral of |f|)`.
pub fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (x, wk, wg) in kronrod_nodes(a, b) {
        let v = f(x);
        k += v * wk;
        g += v * wg;
        abs += v.norm() * wk.abs();
    }
    (k, scaled_error((k - g).norm(), abs), abs)
}

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Relative accuracy target.
    pub rel: f64,
    /// Absolute floor below which an entry counts as converged.
    pub abs: f64,
    /// Maximum number of panels before giving up.
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs: 1e-14,
            max_panels: 4000,
        }
    }
}

#[derive(Debug)]
struct ScalarPanel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for ScalarPanel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for ScalarPanel {}
impl PartialOrd for ScalarPanel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ScalarPanel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of a scalar adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive integration of `f` over the union of the intervals
/// delimited by `breaks` (at least two increasing points).
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut absint = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e, a) = gk21(&mut f, w[0], w[1]);
        total += v;
        err += e;
        absint += a;
        heap.push(ScalarPanel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        let target = (tol.rel * total.norm()).max(tol.abs).max(50.0 * f64::EPSILON * absint);
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                panels: heap.len(),
            });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::QuadratureFailure {
                context: format!("interval [{}, {}]", breaks[0], breaks[breaks.len() - 1]),
                error: err,
                tolerance: target,
            });
        }
        let p = heap.pop().expect("panel heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // The panel can no longer be split in floating point.
            return Err(Error::QuadratureFailure {
                context: format!("panel [{}, {}] exhausted", p.a, p.b),
                error: err,
                tolerance: target,
            });
        }
        let (v1, e1, a1) = gk21(&mut f, p.a, m);
        let (v2, e2, a2) = gk21(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        absint += a1 + a2;
        heap.push(ScalarPanel {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(ScalarPanel {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
        // Recompute the running error from scratch now and then to avoid drift.
        if heap.len() % 64 == 0 {
            err = heap.iter().map(|p| p.error).sum();
            total = heap.iter().map(|p| p.value).sum();
        }
    }
}

/// Per-entry results of a vector integration.
#[derive(Debug, Clone)]
pub struct VecQuadResult {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub panels: usize,
}

struct VecPanel {
    a: f64,
    b: f64,
    err: Vec<f32>,
}

/// Evaluates one Kronrod panel for a vector integrand.
fn vec_panel<F>(f: &F, n: usize, a: f64, b: f64, scratch: &mut [Complex64]) -> (Vec<Complex64>, Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [Complex64]),
{
    let mut k = vec![Complex64::new(0.0, 0.0); n];
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let mut abs = vec![0.0; n];
    for (x, wk, wg) in kronrod_nodes(a, b) {
        f(x, scratch);
        for i in 0..n {
            let v = scratch[i];
            k[i] += v * wk;
            abs[i] += v.norm() * wk;
            if wg != 0.0 {
                g[i] += v * wg;
            }
        }
    }
    let err = (0..n).map(|i| scaled_error((k[i] - g[i]).norm(), abs[i])).collect();
    (k, err, abs)
}

/// Adaptive integration of `n` integrands that share one panel set.
///
/// `f(x, out)` writes all `n` integrand values at `x`. Convergence requires
/// every entry to satisfy `error <= max(rel |I|, abs)`.
pub fn integrate_vec<F>(f: F, n: usize, breaks: &[f64], tol: Tolerance) -> Result<VecQuadResult>
where
    F: Fn(f64, &mut [Complex64]),
{
    integrate_vec_labeled(f, n, breaks, tol, |i| format!("vector entry {i} of {n}"))
}

/// [`integrate_vec`] with a caller-supplied description of entry `i` used in
/// failure reports.
pub fn integrate_vec_labeled<F, L>(f: F, n: usize, breaks: &[f64], tol: Tolerance, label: L) -> Result<VecQuadResult>
where
    F: Fn(f64, &mut [Complex64]),
    L: Fn(usize) -> String,
{
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    let mut err = vec![0.0f64; n];
    let mut absint = vec![0.0f64; n];
    let mut panels: Vec<VecPanel> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (k, e, a) = vec_panel(&f, n, w[0], w[1], &mut scratch);
        for i in 0..n {
            total[i] += k[i];
            err[i] += e[i];
            absint[i] += a[i];
        }
        panels.push(VecPanel {
            a: w[0],
            b: w[1],
            err: e.iter().map(|&x| x as f32).collect(),
        });
    }
    loop {
        let target: Vec<f64> = (0..n)
            .map(|i| (tol.rel * total[i].norm()).max(tol.abs).max(50.0 * f64::EPSILON * absint[i]))
            .collect();
        let worst = (0..n)
            .map(|i| err[i] / target[i])
            .fold(0.0f64, f64::max);
        if worst <= 1.0 {
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            return Ok(VecQuadResult {
                values: total,
                errors: err,
                panels: panels.len(),
            });
        }
        if panels.len() >= tol.max_panels {
            let i = (0..n)
                .max_by(|&i, &j| (err[i] / target[i]).total_cmp(&(err[j] / target[j])))
                .unwrap_or(0);
            return Err(Error::QuadratureFailure {
                context: label(i),
                error: err[i],
                tolerance: target[i],
            });
        }
        // Score panels by their share of the worst per-entry error budget.
        let failing: Vec<usize> = (0..n).filter(|&i| err[i] > target[i]).collect();
        let scores: Vec<f64> = panels
            .iter()
            .map(|p| {
                failing
                    .iter()
                    .map(|&i| p.err[i] as f64 / target[i])
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let best = scores.iter().cloned().fold(0.0f64, f64::max);
        let mut chosen: Vec<usize> = (0..panels.len()).filter(|&j| scores[j] >= 0.1 * best).collect();
        let room = tol.max_panels.saturating_sub(panels.len()).max(1);
        if chosen.len() > room {
            chosen.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]));
            chosen.truncate(room);
        }
        chosen.sort_unstable_by(|x, y| y.cmp(x));
        for j in chosen {
            let p = panels.swap_remove(j);
            let m = 0.5 * (p.a + p.b);
            if m <= p.a || m >= p.b {
                return Err(Error::QuadratureFailure {
                    context: format!("panel [{}, {}] exhausted", p.a, p.b),
                    error: worst,
                    tolerance: 1.0,
                });
            }
            let (k0, _, _) = vec_panel(&f, n, p.a, p.b, &mut scratch);
            let (k1, e1, a1) = vec_panel(&f, n, p.a, m, &mut scratch);
            let (k2, e2, a2) = vec_panel(&f, n, m, p.b, &mut scratch);
            for i in 0..n {
                total[i] += k1[i] + k2[i] - k0[i];
                err[i] += e1[i] + e2[i] - p.err[i] as f64;
                absint[i] += a1[i] + a2[i];
            }
            panels.push(VecPanel {
                a: p.a,
                b: m,
                err: e1.iter().map(|&x| x as f32).collect(),
            });
            panels.push(VecPanel {
                a: m,
                b: p.b,
                err: e2.iter().map(|&x| x as f32).collect(),
            });
        }
        // The f32 copies make the running error drift slightly; resum it.
        for i in 0..n {
            err[i] = panels.iter().map(|p| p.err[i] as f64).sum();
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
