mod common;

use common::{c, rel_l2};
use gabor_ewald::oracle::*;
use gabor_ewald::scene::{incident_field, Scene, Shape};
use gabor_ewald::{Complex64, Error};
use std::f64::consts::PI;
use std::sync::OnceLock;

fn circle_mom() -> &'static MomSolution {
    static S: OnceLock<MomSolution> = OnceLock::new();
    S.get_or_init(|| {
        let s = Scene::circle();
        mom_solve(&s, &MoMConfig::for_wavenumber(s.k0)).unwrap()
    })
}

fn series_grid(s: &Scene, like: &FieldGrid) -> FieldGrid {
    FieldGrid {
        xs: like.xs.clone(),
        zs: like.zs.clone(),
        values: like.points().map(|(x, z)| cylinder_series(s, x, z).unwrap()).collect(),
    }
}

#[test]
fn mom_matches_the_cylinder_series() {
    let s = Scene::circle();
    let es = circle_mom().scattered();
    let exact = series_grid(&s, &es);
    for region in [Region::Inside, Region::Full] {
        let mask = region_mask(&es, &s, region);
        let m = compare_fields(&exact, &es, &mask).unwrap();
        assert!(m.relative_l2 <= 1e-2, "{region:?}: {}", m.relative_l2);
    }
    // Off the cell centres, including outside the object.
    let probes = [(2.0, 0.3), (-1.8, -1.1), (0.0, 3.0), (0.4, 0.2), (-0.9, 0.7), (2.5, -2.5)];
    let a: Vec<Complex64> = probes.iter().map(|&(x, z)| circle_mom().scattered_at(x, z).unwrap()).collect();
    let b: Vec<Complex64> = probes.iter().map(|&(x, z)| cylinder_series(&s, x, z).unwrap()).collect();
    let e = rel_l2(&a, &b);
    assert!(e <= 2e-2, "{e}");
}

#[test]
fn halving_the_cell_changes_little() {
    let s = Scene::circle();
    let fine = mom_solve(
        &s,
        &MoMConfig {
            cell: MoMConfig::for_wavenumber(s.k0).cell / 2.0,
            max_cells: 40_000,
        },
    )
    .unwrap();
    let probes: Vec<(f64, f64)> = (0..8)
        .flat_map(|i| (0..8).map(move |j| (-1.6 + 0.45 * i as f64, -1.6 + 0.45 * j as f64)))
        .collect();
    let coarse: Vec<Complex64> = probes.iter().map(|&(x, z)| circle_mom().scattered_at(x, z).unwrap()).collect();
    let refined: Vec<Complex64> = probes.iter().map(|&(x, z)| fine.scattered_at(x, z).unwrap()).collect();
    assert!(rel_l2(&coarse, &refined) <= 1e-2);
}

#[test]
fn vacuum_scatters_nothing() {
    let s = Scene { eps_r: 1.0, ..Scene::circle() };
    let sol = mom_solve(&s, &MoMConfig::for_wavenumber(s.k0)).unwrap();
    assert!(sol.scattered().values.iter().all(|v| v.norm() <= 1e-15));
    assert_eq!(sol.scattered_at(3.0, 1.0).unwrap(), c(0.0, 0.0));
    assert!(cylinder_series(&s, 0.5, 0.5).unwrap().norm() <= 1e-14);
}

#[test]
fn mom_is_linear_in_the_amplitude() {
    let s = Scene { e0: 2.5, ..Scene::circle() };
    let sol = mom_solve(&s, &MoMConfig::for_wavenumber(s.k0)).unwrap();
    let a = sol.scattered();
    let b = circle_mom().scattered();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v * 2.5).norm() <= 1e-12 * v.norm().max(1e-3));
    }
}

/// Far-field amplitude `Σ_j χ_j E_j e^{-jk0(x_j cos φ + z_j sin φ)} A_j`.
fn far_amplitude(sol: &MomSolution, phi: f64) -> Complex64 {
    let k0 = sol.scene.k0;
    let area = sol.hx * sol.hz;
    sol.total
        .points()
        .zip(&sol.total.values)
        .zip(&sol.chi)
        .map(|(((x, z), e), &chi)| e * chi * area * Complex64::from_polar(1.0, -k0 * (x * phi.cos() + z * phi.sin())))
        .sum()
}

#[test]
fn far_field_is_reciprocal() {
    // An off-centre rectangle has no symmetry that would make this trivial.
    let base = Scene {
        shape: Shape::Rectangle { width: 2.0, height: 1.0 },
        center: (0.3, -0.2),
        ..Scene::rectangle()
    };
    let cfg = MoMConfig::for_wavenumber(base.k0);
    for (inc, obs) in [(0.5f64, 1.9f64), (0.2, 4.0)] {
        let forward = mom_solve(&Scene { theta: inc, ..base }, &cfg).unwrap();
        let backward = mom_solve(&Scene { theta: obs + PI, ..base }, &cfg).unwrap();
        let a = far_amplitude(&forward, obs);
        let b = far_amplitude(&backward, inc + PI);
        assert!((a - b).norm() <= 1e-2 * a.norm(), "{a} vs {b}");
    }
}

#[test]
fn scattered_is_total_minus_incident() {
    let sol = circle_mom();
    let es = sol.scattered();
    for (((x, z), e), t) in es.points().zip(&es.values).zip(&sol.total.values) {
        assert_eq!(*e, t - incident_field(x, z, &sol.scene));
    }
    // Cells cut by the boundary carry a fraction of the contrast.
    assert!(sol.chi.iter().any(|&v| v > 0.0 && v < 1.0));
    assert!(sol.chi.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn compare_fields_metrics() {
    let g = FieldGrid {
        xs: vec![0.0, 1.0],
        zs: vec![0.0, 1.0, 2.0],
        values: (0..6).map(|i| c(i as f64, 1.0)).collect(),
    };
    let all = vec![true; 6];
    let same = compare_fields(&g, &g, &all).unwrap();
    assert_eq!(same.relative_l2, 0.0);
    assert_eq!(same.max_abs, 0.0);
    assert!(same.abs_error.iter().all(|&e| e == 0.0));
    let double = FieldGrid {
        values: g.values.iter().map(|v| v * 2.0).collect(),
        ..g.clone()
    };
    let mask = vec![false, true, false, true, true, false];
    let m = compare_fields(&g, &double, &mask).unwrap();
    assert!((m.relative_l2 - 1.0).abs() < 1e-15);
    assert_eq!(m.max_abs, g.values[4].norm());
    assert_eq!(m.abs_error.len(), 6);
}

#[test]
fn compare_fields_rejects_different_grids() {
    let g = FieldGrid {
        xs: vec![0.0, 1.0],
        zs: vec![0.0],
        values: vec![c(1.0, 0.0); 2],
    };
    let h = FieldGrid {
        xs: vec![0.0, 2.0],
        ..g.clone()
    };
    assert!(matches!(compare_fields(&g, &h, &[true, true]), Err(Error::GridMismatch(_))));
    assert!(matches!(compare_fields(&g, &g, &[true]), Err(Error::GridMismatch(_))));
}

#[test]
fn region_masks_split_the_grid() {
    let s = Scene::circle();
    let es = circle_mom().scattered();
    let inside = region_mask(&es, &s, Region::Inside);
    let outside = region_mask(&es, &s, Region::Outside);
    assert!(inside.iter().zip(&outside).all(|(a, b)| a != b));
    assert!(region_mask(&es, &s, Region::Full).iter().all(|&v| v));
    assert!(inside.iter().any(|&v| v) && outside.iter().any(|&v| v));
}

#[test]
fn cell_size_is_validated() {
    let s = Scene::circle();
    let lambda = 2.0 * PI / s.k0;
    for cell in [0.0, -0.1, lambda / 5.0, f64::NAN] {
        let cfg = MoMConfig { cell, max_cells: 40_000 };
        assert!(matches!(mom_solve(&s, &cfg), Err(Error::Config { .. })), "cell {cell}");
    }
    let cfg = MoMConfig {
        cell: lambda / 20.0,
        max_cells: 10,
    };
    assert!(matches!(mom_solve(&s, &cfg), Err(Error::SizeCap { cap: 10, .. })));
}

#[test]
fn series_needs_a_circle() {
    assert!(matches!(cylinder_series(&Scene::rectangle(), 0.0, 0.0), Err(Error::Domain(_))));
}

#[test]
fn series_is_continuous_across_the_boundary() {
    let s = Scene::circle();
    for phi in [0.0f64, 1.0, 2.5] {
        let (sn, cs) = phi.sin_cos();
        let at = |r: f64| cylinder_series(&s, r * cs, r * sn).unwrap();
        let (inner, outer) = (at(1.35 * (1.0 - 1e-9)), at(1.35 * (1.0 + 1e-9)));
        assert!((inner - outer).norm() <= 1e-7 * outer.norm());
    }
    // Finite at the centre.
    assert!(cylinder_series(&s, 0.0, 0.0).unwrap().norm().is_finite());
}
