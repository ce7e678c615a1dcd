mod common;

use common::{c, rel_l2};
use gabor_ewald::frame::{default_dual, frame_element, spectral_frame_element, CoeffTensor, DualWindow, FrameOps, FrameParams, XGrid};
use gabor_ewald::green::EwaldConfig;
use gabor_ewald::kernels::ZGrid;
use gabor_ewald::operator::DiscreteOperator;
use gabor_ewald::quad::integrate;
use gabor_ewald::scene::{contrast_slices, Scene, Shape};
use gabor_ewald::solver::synthesize_tensor;
use gabor_ewald::tables::{build_spatial_table, build_spectral_table, KernelTable};
use gabor_ewald::{Complex64, Error};
use std::f64::consts::PI;
use std::sync::OnceLock;

const K0: f64 = 1.45;

fn fp() -> FrameParams {
    FrameParams::standard(3, 1)
}

fn zg() -> ZGrid {
    ZGrid::centered(0.05, 6)
}

fn dual() -> &'static DualWindow {
    static D: OnceLock<DualWindow> = OnceLock::new();
    D.get_or_init(|| default_dual(&fp(), 2, 3).unwrap().1)
}

fn tables(scale: f64) -> (KernelTable, KernelTable) {
    let base = EwaldConfig::optimal(K0, zg().delta).unwrap();
    let cfg = EwaldConfig { split: base.split * scale, ..base };
    (
        build_spatial_table(&fp(), &zg(), &cfg, 2, 3).unwrap(),
        build_spectral_table(&fp(), &zg(), &cfg, 2, 3).unwrap(),
    )
}

fn base_tables() -> &'static (KernelTable, KernelTable) {
    static T: OnceLock<(KernelTable, KernelTable)> = OnceLock::new();
    T.get_or_init(|| tables(1.0))
}

fn operator_with(t: &(KernelTable, KernelTable), chi: impl Fn(f64, usize) -> f64) -> DiscreteOperator {
    let ops = FrameOps::new(&fp(), XGrid::analysis(&fp()), dual()).unwrap();
    let xs = ops.grid.points();
    let slices = (0..zg().len()).map(|l| xs.iter().map(|&x| chi(x, l)).collect()).collect();
    DiscreteOperator::new(&t.0, &t.1, dual(), ops, &zg(), slices).unwrap()
}

fn free_space() -> &'static DiscreteOperator {
    static OP: OnceLock<DiscreteOperator> = OnceLock::new();
    OP.get_or_init(|| operator_with(base_tables(), |_, _| 0.0))
}

/// A slab `|x| <= 1` occupying the three middle z nodes.
fn slab() -> &'static DiscreteOperator {
    static OP: OnceLock<DiscreteOperator> = OnceLock::new();
    OP.get_or_init(|| operator_with(base_tables(), |x, l| if x.abs() <= 1.0 && (2..=4).contains(&l) { 1.0 } else { 0.0 }))
}

fn pseudo_random(seed: u64) -> CoeffTensor {
    let mut t = CoeffTensor::zeros(&fp(), zg().n_k);
    let mut s = seed;
    for v in t.data.iter_mut() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let a = (s >> 11) as f64 / (1u64 << 53) as f64;
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let b = (s >> 11) as f64 / (1u64 << 53) as f64;
        *v = c(a - 0.5, b - 0.5);
    }
    t
}

fn unit(m: i64, n: i64, k: usize) -> CoeffTensor {
    let mut t = CoeffTensor::zeros(&fp(), zg().n_k);
    t.set(m, n, k, c(1.0, 0.0));
    t
}

#[test]
fn green_apply_is_linear() {
    let op = free_space();
    let (a, b) = (pseudo_random(1), pseudo_random(2));
    let (sa, sb) = (c(0.7, -1.3), c(-2.0, 0.25));
    let mut mix = a.clone();
    for ((v, x), y) in mix.data.iter_mut().zip(&a.data).zip(&b.data) {
        *v = sa * x + sb * y;
    }
    let ga = op.green_apply(&a).unwrap();
    let gb = op.green_apply(&b).unwrap();
    let gm = op.green_apply(&mix).unwrap();
    let expect: Vec<Complex64> = ga.data.iter().zip(&gb.data).map(|(x, y)| sa * x + sb * y).collect();
    assert!(rel_l2(&gm.data, &expect) < 1e-12);
}

#[test]
fn zero_source_and_zero_contrast() {
    let op = free_space();
    let zero = CoeffTensor::zeros(&fp(), zg().n_k);
    assert!(op.green_apply(&zero).unwrap().data.iter().all(|v| *v == c(0.0, 0.0)));
    let j = pseudo_random(3);
    assert_eq!(op.apply_system(&j).unwrap().data, j.data);
    assert!(op.forward(&j, &j).unwrap().data.iter().all(|v| *v == c(0.0, 0.0)));
}

#[test]
fn dense_assembly_matches_matrix_free_apply() {
    let op = slab();
    let a = op.assemble_dense(10_000).unwrap();
    let j = pseudo_random(4);
    let av = op.apply_system(&j).unwrap();
    let n = op.unknowns();
    let dense: Vec<Complex64> = (0..n).map(|i| (0..n).map(|k| a[(i, k)] * j.data[k]).sum()).collect();
    assert!(rel_l2(&dense, &av.data) < 1e-12);
    assert!(matches!(op.assemble_dense(n - 1), Err(Error::SizeCap { unknowns, cap }) if unknowns == n && cap == n - 1));
}

#[test]
fn operator_rejects_mismatched_inputs() {
    let (s, t) = base_tables();
    let ops = FrameOps::new(&fp(), XGrid::analysis(&fp()), dual()).unwrap();
    let chi = vec![vec![0.0; ops.grid.n]; zg().len()];
    assert!(matches!(
        DiscreteOperator::new(t, s, dual(), ops.clone(), &zg(), chi.clone()),
        Err(Error::DimensionMismatch(_))
    ));
    let other = ZGrid::centered(0.05, 8);
    assert!(matches!(
        DiscreteOperator::new(s, t, dual(), ops.clone(), &other, chi.clone()),
        Err(Error::DimensionMismatch(_))
    ));
    let (_, wide) = default_dual(&fp(), 3, 3).unwrap();
    assert!(matches!(DiscreteOperator::new(s, t, &wide, ops.clone(), &zg(), chi), Err(Error::DimensionMismatch(_))));
    let wrong = CoeffTensor::zeros(&FrameParams::standard(2, 1), zg().n_k);
    assert!(free_space().green_apply(&wrong).is_err());
}

#[test]
fn unit_contrast_reproduces_signals_in_the_span() {
    let p = FrameParams::standard(8, 6);
    let (eta, fitted) = default_dual(&p, 2, 3).unwrap();
    let mut c0 = vec![c(0.0, 0.0); p.per_slice()];
    for (m, n, v) in [(0, 0, c(1.0, 0.0)), (2, -1, c(0.3, 0.4)), (-4, 2, c(-0.5, 0.1)), (3, 2, c(0.0, -0.7))] {
        c0[p.index(m, n)] = v;
    }
    // The sampled dual is exact up to truncation; the Gaussian fit adds its own residual.
    for (ops, bound) in [
        (FrameOps::new(&p, XGrid::analysis(&p), &eta).unwrap(), 1e-3),
        (FrameOps::new(&p, XGrid::analysis(&p), &fitted).unwrap(), 1e-2),
    ] {
        let proj = ops.weighted_projection(&vec![1.0; ops.grid.n]);
        let c1: Vec<Complex64> = (0..p.per_slice()).map(|r| (0..p.per_slice()).map(|k| proj[(r, k)] * c0[k]).sum()).collect();
        let e = rel_l2(&ops.synthesize(&c1), &ops.synthesize(&c0));
        assert!(e <= bound, "{e} > {bound}");
    }
}

#[test]
fn contrast_slices_outside_the_object_give_zero_output() {
    let op = slab();
    let out = op.contrast_multiply(&op.green_apply(&pseudo_random(5)).unwrap()).unwrap();
    for l in 0..zg().len() {
        let zero = out.slice(l).iter().all(|v| *v == c(0.0, 0.0));
        assert_eq!(zero, !(2..=4).contains(&l), "slice {l}");
    }
}

#[test]
fn shifting_the_source_by_one_lattice_step_shifts_the_field() {
    let op = free_space();
    let p = fp();
    let ab = 2.0 * PI * p.alpha * p.beta;
    let mm = p.m_max as i64;
    for (n, k) in [(0, 3), (1, 2), (-1, 5)] {
        let e0 = op.green_apply(&unit(0, n, k)).unwrap();
        let e1 = op.green_apply(&unit(1, n, k)).unwrap();
        let src_phase = Complex64::from_polar(1.0, ab * n as f64);
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for l in 0..zg().len() {
            for s in -mm..mm {
                for t in -1..=1i64 {
                    let expect = e0.get(s, t, l) * src_phase * Complex64::from_polar(1.0, -ab * t as f64);
                    worst = worst.max((e1.get(s + 1, t, l) - expect).norm());
                    peak = peak.max(expect.norm());
                }
            }
        }
        assert!(worst <= 1e-6 * peak, "n={n} k={k}: {worst:e} vs {peak:e}");
    }
}

/// Field of the unit source `a` at the centre of the unit source `b`.
fn field_at_centre(op: &DiscreteOperator, a: (i64, usize), b: (i64, usize)) -> Complex64 {
    let p = fp();
    let e = op.green_apply(&unit(a.0, 0, a.1)).unwrap();
    synthesize_tensor(&e, &[b.0 as f64 * p.shift()], &[zg().node(b.1)], &p, &zg())[0]
}

#[test]
fn field_level_reciprocity() {
    let op = free_space();
    for (a, b) in [((0, 3), (1, 4)), ((-1, 2), (1, 2)), ((0, 1), (-1, 4)), ((1, 0), (0, 6))] {
        let ab = field_at_centre(op, a, b);
        let ba = field_at_centre(op, b, a);
        let r = (ab - ba).norm() / ab.norm();
        assert!(r <= 1e-4, "{a:?} {b:?}: {ab} vs {ba}, rel {r:e}");
    }
}

#[test]
fn spectral_coefficients_convert_with_the_duality_phase() {
    let p = fp();
    let ab = 2.0 * PI * p.alpha * p.beta;
    let mm = p.m_max as i64;
    let nn = p.n_max as i64;
    let spec = |m: i64, n: i64| c((0.3 * m as f64 + 0.7 * n as f64).sin(), (0.2 * m as f64 - 0.4 * n as f64).cos());
    let mut coeffs = vec![c(0.0, 0.0); p.per_slice()];
    for m in -mm..=mm {
        for n in -nn..=nn {
            coeffs[p.index(m, n)] = spec(m, n) * Complex64::from_polar(1.0, -ab * (m * n) as f64);
        }
    }
    let xs: Vec<f64> = (-24..=24).map(|i| i as f64 * 0.07).collect();
    let direct: Vec<Complex64> = xs
        .iter()
        .map(|&x| (0..p.per_slice()).map(|i| {
            let (m, n) = p.mn(i);
            coeffs[i] * frame_element(x, m, n, &p)
        }).sum())
        .collect();
    let kk = p.k();
    let reach = (nn as f64 + 5.0) * kk;
    let breaks: Vec<f64> = (0..=80).map(|i| -reach + 2.0 * reach * i as f64 / 80.0).collect();
    let inverse: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let f = |k: f64| -> Complex64 {
                let mut acc = c(0.0, 0.0);
                for m in -mm..=mm {
                    for n in -nn..=nn {
                        acc += spec(m, n) * spectral_frame_element(k, n, m, &p);
                    }
                }
                acc * Complex64::from_polar(1.0, k * x) / (2.0 * PI)
            };
            integrate(f, &breaks, common::tight()).unwrap().value
        })
        .collect();
    assert!(rel_l2(&inverse, &direct) <= 1e-6);
}

#[test]
fn circle_contrast_output_vanishes_outside() {
    let p = FrameParams::standard(8, 6);
    let (eta, _) = default_dual(&p, 2, 3).unwrap();
    let ops = FrameOps::new(&p, XGrid::analysis(&p), &eta).unwrap();
    let circle = Scene::circle();
    let xs = ops.grid.points();
    let chi: Vec<f64> = xs.iter().map(|&x| gabor_ewald::scene::contrast_at(x, 0.0, &circle)).collect();
    let wave: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, circle.k0 * x)).collect();
    let proj = ops.weighted_projection(&chi);
    let c0 = ops.analyze(&wave);
    let ns = p.per_slice();
    let c1: Vec<Complex64> = (0..ns).map(|r| (0..ns).map(|k| proj[(r, k)] * c0[k]).sum()).collect();
    let f = ops.synthesize(&c1);
    let peak = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let radius = 1.35;
    let mut outside = 0.0f64;
    for (x, v) in xs.iter().zip(&f) {
        if x.abs() > radius + 2.0 * p.x_width && x.abs() < p.m_max as f64 * p.shift() {
            outside = outside.max(v.norm());
        }
    }
    assert!(outside <= 1e-3 * peak, "{outside:e} vs peak {peak:e}");
}

#[test]
fn field_does_not_depend_on_the_split() {
    let wide = tables(1.5);
    let op2 = operator_with(&wide, |_, _| 0.0);
    let op = free_space();
    for seed in [6, 7] {
        let j = pseudo_random(seed);
        let a = op.green_apply(&j).unwrap();
        let b = op2.green_apply(&j).unwrap();
        assert!(rel_l2(&b.data, &a.data) <= 1e-6);
    }
}

#[test]
fn contrast_slices_follow_the_object() {
    let shape = Scene {
        shape: Shape::Rectangle { width: 2.0, height: 0.12 },
        ..Scene::circle()
    };
    let ops = FrameOps::new(&fp(), XGrid::analysis(&fp()), dual()).unwrap();
    let slices = contrast_slices(&shape, &ops, &zg());
    let active: Vec<usize> = (0..zg().len()).filter(|&l| slices[l].iter().any(|&v| v != 0.0)).collect();
    assert_eq!(active, vec![2, 3, 4]);
}
