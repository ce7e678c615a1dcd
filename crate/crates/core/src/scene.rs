//! Scatterer geometry, contrast and incident field.

use crate::error::{Error, Result};
use crate::frame::{CoeffTensor, FrameOps, FrameParams};
use crate::kernels::ZGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cross-section of the scatterer, centred on [`Scene::center`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Circle {
        radius: f64,
    },
    /// `width` along `x`, `height` along `z`.
    Rectangle {
        width: f64,
        height: f64,
    },
    /// `n_blocks` rectangles of `block_w × block_h` repeated along `x` with
    /// centre-to-centre distance `spacing`.
    Grating {
        n_blocks: usize,
        block_w: f64,
        block_h: f64,
        spacing: f64,
    },
}

/// A homogeneous dielectric object in vacuum lit by a plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub shape: Shape,
    pub eps_r: f64,
    pub k0: f64,
    /// Incidence angle in radians, measured from the `x` axis.
    pub theta: f64,
    pub e0: f64,
    pub center: (f64, f64),
}

impl Scene {
    pub fn circle() -> Self {
        Scene {
            shape: Shape::Circle { radius: 1.35 },
            eps_r: 2.0,
            k0: 1.45,
            theta: 0.0,
            e0: 1.0,
            center: (0.0, 0.0),
        }
    }

    pub fn rectangle() -> Self {
        Scene {
            shape: Shape::Rectangle {
                width: 5.0,
                height: 2.0,
            },
            eps_r: 2.0,
            k0: 0.8388,
            theta: std::f64::consts::FRAC_PI_2,
            e0: 1.0,
            center: (0.0, 0.0),
        }
    }

    pub fn grating() -> Self {
        Scene {
            shape: Shape::Grating {
                n_blocks: 5,
                block_w: 1.0,
                block_h: 1.4,
                spacing: 2.0,
            },
            eps_r: 2.0,
            k0: 1.5,
            theta: std::f64::consts::FRAC_PI_4,
            e0: 1.0,
            center: (0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Config {
                field: field.into(),
                message,
            })
        };
        if !(self.eps_r >= 1.0 && self.eps_r.is_finite()) {
            return bad("scene.eps_r", format!("{} must be at least 1", self.eps_r));
        }
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return bad("scene.k0", format!("{} must be positive", self.k0));
        }
        let ok = match self.shape {
            Shape::Circle { radius } => radius > 0.0,
            Shape::Rectangle { width, height } => width > 0.0 && height > 0.0,
            Shape::Grating {
                n_blocks,
                block_w,
                block_h,
                spacing,
            } => n_blocks > 0 && block_w > 0.0 && block_h > 0.0 && spacing >= block_w,
        };
        if !ok {
            return bad("scene.shape", "dimensions must be positive and blocks must not overlap".into());
        }
        Ok(())
    }

    /// Whether `(x, z)` lies inside the object. Boundaries count as inside.
    pub fn inside(&self, x: f64, z: f64) -> bool {
        let (x, z) = (x - self.center.0, z - self.center.1);
        match self.shape {
            Shape::Circle { radius } => x * x + z * z <= radius * radius,
            Shape::Rectangle { width, height } => x.abs() <= 0.5 * width && z.abs() <= 0.5 * height,
            Shape::Grating {
                n_blocks,
                block_w,
                block_h,
                spacing,
            } => {
                if z.abs() > 0.5 * block_h {
                    return false;
                }
                let first = -0.5 * (n_blocks as f64 - 1.0) * spacing;
                let j = ((x - first) / spacing).round();
                j >= 0.0 && j < n_blocks as f64 && (x - first - j * spacing).abs() <= 0.5 * block_w
            }
        }
    }

    /// `(x_min, x_max, z_min, z_max)` of the object.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let (hx, hz) = match self.shape {
            Shape::Circle { radius } => (radius, radius),
            Shape::Rectangle { width, height } => (0.5 * width, 0.5 * height),
            Shape::Grating {
                n_blocks,
                block_w,
                block_h,
                spacing,
            } => (0.5 * (n_blocks as f64 - 1.0) * spacing + 0.5 * block_w, 0.5 * block_h),
        };
        (self.center.0 - hx, self.center.0 + hx, self.center.1 - hz, self.center.1 + hz)
    }

    /// Checks that the object lies inside the z grid and at least `2X`
    /// inside the spatial coverage `[-MαX, MαX]` of the frame.
    pub fn check_fits(&self, fp: &FrameParams, zg: &ZGrid) -> Result<()> {
        let (x0, x1, z0, z1) = self.bounding_box();
        let reach = fp.m_max as f64 * fp.shift() - 2.0 * fp.x_width;
        if x0 < -reach - 1e-12 || x1 > reach + 1e-12 {
            return Err(Error::Config {
                field: "frame.M".into(),
                message: format!(
                    "object spans x in [{x0}, {x1}] but M = {} only covers |x| <= {reach:.4} with a 2X margin",
                    fp.m_max
                ),
            });
        }
        if z0 < zg.z_min - 1e-12 || z1 > zg.z_max + 1e-12 {
            return Err(Error::Config {
                field: "zgrid".into(),
                message: format!(
                    "object spans z in [{z0}, {z1}] outside the grid [{}, {}]",
                    zg.z_min, zg.z_max
                ),
            });
        }
        Ok(())
    }

    /// Cell-averaged contrast over `[x - hx/2, x + hx/2] × [z - hz/2, z + hz/2]`
    /// by `n × n` midpoint sub-sampling.
    pub fn contrast_fraction(&self, x: f64, z: f64, hx: f64, hz: f64, n: usize) -> f64 {
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let xs = x + hx * ((i as f64 + 0.5) / n as f64 - 0.5);
                let zs = z + hz * ((j as f64 + 0.5) / n as f64 - 0.5);
                if self.inside(xs, zs) {
                    count += 1;
                }
            }
        }
        (self.eps_r - 1.0) * count as f64 / (n * n) as f64
    }
}

/// `χ(x, z) = ε_r - 1` inside the object and zero outside.
pub fn contrast_at(x: f64, z: f64, s: &Scene) -> f64 {
    if s.inside(x, z) {
        s.eps_r - 1.0
    } else {
        0.0
    }
}

/// `E0 e^{jk0(x cos θ + z sin θ)}`.
pub fn incident_field(x: f64, z: f64, s: &Scene) -> Complex64 {
    let (st, ct) = s.theta.sin_cos();
    Complex64::from_polar(s.e0, s.k0 * (x * ct + z * st))
}

/// Contrast samples `χ(x_i, z_l)` on the analysis grid for every z node.
pub fn contrast_slices(s: &Scene, ops: &FrameOps, zg: &ZGrid) -> Vec<Vec<f64>> {
    let xs = ops.grid.points();
    (0..zg.len())
        .map(|l| {
            let z = zg.node(l);
            xs.iter().map(|&x| contrast_at(x, z, s)).collect()
        })
        .collect()
}

/// Coefficients of `χE^i`: each z node is analysed separately, which is
/// exact in `z` because the triangle functions interpolate at the nodes.
pub fn project_source(s: &Scene, ops: &FrameOps, zg: &ZGrid) -> CoeffTensor {
    let mut out = CoeffTensor::zeros(&ops.params, zg.n_k);
    let xs = ops.grid.points();
    for l in 0..zg.len() {
        let z = zg.node(l);
        let f: Vec<Complex64> = xs.iter().map(|&x| contrast_at(x, z, s) * incident_field(x, z, s)).collect();
        if f.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        out.slice_mut(l).copy_from_slice(&ops.analyze(&f));
    }
    out
}
