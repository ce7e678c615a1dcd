//! Reference solutions: a pulse-basis method of moments and the series
//! solution for a dielectric circular cylinder.
//!
//! The MoM tiles the object's bounding box with rectangular cells of at
//! most the requested size and matches `E = E^i + k0² ∫ G χ E` at the cell
//! centres. Each cell carries its area-averaged contrast, so cells cut by
//! a curved boundary get a fractional weight. Off-diagonal entries use the
//! centre-to-centre Green function times the cell area; the self term
//! integrates `G` over the disk of equal area,
//!
//! ```text
//! k0² ∫_{ρ<a} G dA = -jπ k0 a H1^(2)(k0 a) / 2 - 1,
//! ```
//!
//! which follows from `d/dρ [ρ H1(kρ)] = kρ H0(kρ)` and the small-argument
//! limit `ρ H1^(2)(kρ) → 2j/(πk)`.

use crate::error::{Error, Result};
use crate::green::green_exact;
use crate::scene::{contrast_at, incident_field, Scene, Shape};
use crate::solver::lu_solve;
use crate::special::{bessel_jy_arrays, hankel2_1};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sub-samples per cell side for the area-averaged contrast.
const FRACTION_SAMPLES: usize = 16;

/// Settings of the MoM oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoMConfig {
    /// Largest cell side in metres.
    pub cell: f64,
    /// Cap on the number of cells.
    pub max_cells: usize,
}

impl MoMConfig {
    /// Cells of `λ/20`.
    pub fn for_wavenumber(k0: f64) -> Self {
        MoMConfig {
            cell: 2.0 * PI / k0 / 20.0,
            max_cells: 40_000,
        }
    }

    pub fn validate(&self, k0: f64) -> Result<()> {
        let lambda = 2.0 * PI / k0;
        if !(self.cell > 0.0 && self.cell <= lambda / 10.0) {
            return Err(Error::Config {
                field: "oracle.cell".into(),
                message: format!("cell {} must lie in (0, λ/10 = {}]", self.cell, lambda / 10.0),
            });
        }
        Ok(())
    }
}

/// A complex field sampled on a tensor grid, z-outer row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FieldGrid {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.zs.iter().flat_map(move |&z| self.xs.iter().map(move |&x| (x, z)))
    }
}

/// MoM solution on the cell centres of the bounding-box tiling.
#[derive(Debug, Clone)]
pub struct MomSolution {
    pub scene: Scene,
    pub hx: f64,
    pub hz: f64,
    /// Cell centres and total field at them.
    pub total: FieldGrid,
    /// Area-averaged contrast per cell, same layout as `total`.
    pub chi: Vec<f64>,
}

impl MomSolution {
    /// `E^s = E - E^i` on the cell centres.
    pub fn scattered(&self) -> FieldGrid {
        let values = self
            .total
            .points()
            .zip(&self.total.values)
            .map(|((x, z), e)| e - incident_field(x, z, &self.scene))
            .collect();
        FieldGrid {
            xs: self.total.xs.clone(),
            zs: self.total.zs.clone(),
            values,
        }
    }

    /// `E^s(x, z) = k0² Σ_j χ_j ∫_cell_j G E_j` at arbitrary points.
    pub fn scattered_at(&self, x: f64, z: f64) -> Result<Complex64> {
        let k0 = self.scene.k0;
        let area = self.hx * self.hz;
        let a_eq = (area / PI).sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for (((xj, zj), e), &c) in self.total.points().zip(&self.total.values).zip(&self.chi) {
            if c == 0.0 {
                continue;
            }
            let r = (x - xj).hypot(z - zj);
            let k = if r < 1e-9 * a_eq {
                self_term(k0, a_eq) / (k0 * k0)
            } else {
                green_exact(r, k0)? * area
            };
            acc += k * c * e;
        }
        Ok(acc * k0 * k0)
    }
}

/// `k0² ∫_{ρ<a} G dA` over a disk of radius `a`.
fn self_term(k0: f64, a: f64) -> Complex64 {
    Complex64::new(0.0, -PI * k0 * a / 2.0) * hankel2_1(k0 * a) - 1.0
}

/// Solves the volume integral equation on the bounding-box tiling.
pub fn mom_solve(s: &Scene, cfg: &MoMConfig) -> Result<MomSolution> {
    s.validate()?;
    cfg.validate(s.k0)?;
    let (x0, x1, z0, z1) = s.bounding_box();
    let nx = ((x1 - x0) / cfg.cell).ceil().max(1.0) as usize;
    let nz = ((z1 - z0) / cfg.cell).ceil().max(1.0) as usize;
    let n = nx * nz;
    if n > cfg.max_cells {
        return Err(Error::SizeCap {
            unknowns: n,
            cap: cfg.max_cells,
        });
    }
    let hx = (x1 - x0) / nx as f64;
    let hz = (z1 - z0) / nz as f64;
    let xs: Vec<f64> = (0..nx).map(|i| x0 + (i as f64 + 0.5) * hx).collect();
    let zs: Vec<f64> = (0..nz).map(|i| z0 + (i as f64 + 0.5) * hz).collect();
    let pts: Vec<(f64, f64)> = zs.iter().flat_map(|&z| xs.iter().map(move |&x| (x, z))).collect();
    let chi: Vec<f64> = pts
        .iter()
        .map(|&(x, z)| s.contrast_fraction(x, z, hx, hz, FRACTION_SAMPLES))
        .collect();
    let k0 = s.k0;
    let area = hx * hz;
    let diag = self_term(k0, (area / PI).sqrt());
    let mut a = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                diag * chi[j]
            } else if chi[j] == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let r = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                green_exact(r, k0)? * (k0 * k0 * area * chi[j])
            };
            a[(i, j)] = -v;
        }
        a[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let b: Vec<Complex64> = pts.iter().map(|&(x, z)| incident_field(x, z, s)).collect();
    let (e, _) = lu_solve(&a, &b, false)?;
    Ok(MomSolution {
        scene: *s,
        hx,
        hz,
        total: FieldGrid { xs, zs, values: e },
        chi,
    })
}

/// Scattered field of a dielectric circular cylinder from the series
/// `Σ_n j^n [a_n H_n^(2)(k0ρ) or b_n J_n(k1ρ) - J_n(k0ρ)] e^{jn(φ-θ)}`.
pub fn cylinder_series(s: &Scene, x: f64, z: f64) -> Result<Complex64> {
    let Shape::Circle { radius } = s.shape else {
        return Err(Error::Domain("series solution needs a circular cylinder".into()));
    };
    let k0 = s.k0;
    let k1 = k0 * s.eps_r.sqrt();
    let (dx, dz) = (x - s.center.0, z - s.center.1);
    let rho = dx.hypot(dz);
    let phi = dz.atan2(dx);
    let nmax = (k1 * radius + 4.0 * (k1 * radius).cbrt() + 12.0).ceil() as usize;
    let (j0a, y0a) = bessel_jy_arrays(k0 * radius, nmax + 1);
    let (j1a, _) = bessel_jy_arrays(k1 * radius, nmax + 1);
    let deriv = |v: &[f64], n: usize| -> f64 {
        if n == 0 {
            -v[1]
        } else {
            0.5 * (v[n - 1] - v[n + 1])
        }
    };
    let inside = rho < radius;
    let (jr, yr) = if rho > 0.0 {
        bessel_jy_arrays(if inside { k1 * rho } else { k0 * rho }, nmax + 1)
    } else {
        let mut j = vec![0.0; nmax + 2];
        j[0] = 1.0;
        (j, vec![f64::NEG_INFINITY; nmax + 2])
    };
    let (jr0, _) = if inside && rho > 0.0 {
        bessel_jy_arrays(k0 * rho, nmax + 1)
    } else {
        (jr.clone(), yr.clone())
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=nmax {
        let h = Complex64::new(j0a[n], -y0a[n]);
        let hp = Complex64::new(deriv(&j0a, n), -deriv(&y0a, n));
        let num = k1 * deriv(&j1a, n) * j0a[n] - k0 * j1a[n] * deriv(&j0a, n);
        let den = k0 * j1a[n] * hp - k1 * deriv(&j1a, n) * h;
        let an = num / den;
        let term = if inside {
            let bn = (j0a[n] + an * h) / j1a[n];
            bn * jr[n] - jr0[n]
        } else {
            an * Complex64::new(jr[n], -yr[n])
        };
        let weight = if n == 0 { 1.0 } else { 2.0 * (n as f64 * (phi - s.theta)).cos() };
        acc += Complex64::new(0.0, 1.0).powi(n as i32) * term * weight;
    }
    Ok(acc * s.e0)
}

/// Comparison region for [`compare_fields`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Inside,
    Outside,
    Full,
}

/// Mask selecting the points of `grid` in `region` of the scene.
pub fn region_mask(grid: &FieldGrid, s: &Scene, region: Region) -> Vec<bool> {
    grid.points()
        .map(|(x, z)| match region {
            Region::Full => true,
            Region::Inside => contrast_at(x, z, s) != 0.0,
            Region::Outside => contrast_at(x, z, s) == 0.0,
        })
        .collect()
}

/// Error metrics of `b` against the reference `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMetrics {
    /// `|a - b|` at every point.
    pub abs_error: Vec<f64>,
    /// `‖a - b‖ / ‖a‖` over the mask.
    pub relative_l2: f64,
    /// Largest `|a - b|` over the mask.
    pub max_abs: f64,
}

/// Compares two fields on the same grid over `mask`.
pub fn compare_fields(a: &FieldGrid, b: &FieldGrid, mask: &[bool]) -> Result<FieldMetrics> {
    if a.xs != b.xs || a.zs != b.zs || a.values.len() != b.values.len() {
        return Err(Error::GridMismatch(format!(
            "{}x{} grid against {}x{} grid",
            a.xs.len(),
            a.zs.len(),
            b.xs.len(),
            b.zs.len()
        )));
    }
    if mask.len() != a.values.len() {
        return Err(Error::GridMismatch("mask length differs from the grid".into()));
    }
    let abs_error: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| (u - v).norm()).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut max_abs = 0.0f64;
    for ((e, u), &m) in abs_error.iter().zip(&a.values).zip(mask) {
        if m {
            num += e * e;
            den += u.norm_sqr();
            max_abs = max_abs.max(*e);
        }
    }
    let relative_l2 = if num == 0.0 { 0.0 } else { (num / den).sqrt() };
    Ok(FieldMetrics {
        abs_error,
        relative_l2,
        max_abs,
    })
}
