mod common;

use common::{c, rel};
use gabor_ewald::green::*;
use gabor_ewald::kernels::erf_complex;
use gabor_ewald::special::*;
use gabor_ewald::Error;
use std::f64::consts::PI;

// Reference values computed with mpmath at 30 digits.
const BESSEL_POINTS: [(f64, [f64; 4]); 7] = [
    (0.001, [0.99999975000001562, 0.00049999993750000261, -4.4714166113759233, -636.62216723113941]),
    (0.1, [0.99750156206604003, 0.049937526036242, -1.5342386513503668, -6.4589510947020266]),
    (1.0, [0.76519768655796655, 0.44005058574493352, 0.088256964215676958, -0.78121282130028872]),
    (2.5, [-0.048383776468197996, 0.49709410246427404, 0.49807035961523189, 0.1459181379667858]),
    (7.3, [0.2882169476350144, 0.082570430493257831, 0.062773886374037598, -0.28459437186807211]),
    (25.0, [0.096266783275958116, -0.1253502495802899, -0.12724943226800614, -0.09882996478323741]),
    (120.0, [0.071823415829156128, -0.011805211433001891, -0.012104365410016203, -0.071874473209149534]),
];

const JN_5: [f64; 13] = [
    -0.1775967713143383, -0.32757913759146522, 0.046565116277752216, 0.36483123061366699, 0.39123236045864818,
    0.26114054612017009, 0.131048731781692, 0.053376410155890715, 0.018405216654802001, 0.0055202831394756875,
    0.0014678026473104741, 0.00035092744976620901, 7.6278131660845514e-5,
];

const YN_5: [f64; 13] = [
    -0.30851762524903378, 0.14786314339122684, 0.36766288260552452, 0.14626716269319277, -0.19214228737369319,
    -0.45369482249110188, -0.71524735760851057, -1.2628988357693235, -2.8208693825455952, -7.7638831883765811,
    -25.129110095610097, -92.752557194063806, -382.98214155827065,
];

const JN_03: [f64; 7] = [
    0.97762624653829609, 0.148318816273104, 0.011165861949063963, 0.00055934304774884606, 2.0999005912958368e-5,
    6.3044326337710711e-7, 1.5769532945203224e-8,
];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

#[test]
fn bessel_functions_match_reference_values() {
    for (x, [j0v, j1v, y0v, y1v]) in BESSEL_POINTS {
        assert!(close(j0(x), j0v, 1e-12), "J0({x}) = {}", j0(x));
        assert!(close(j1(x), j1v, 1e-12), "J1({x}) = {}", j1(x));
        assert!(close(y0(x), y0v, 1e-12), "Y0({x}) = {}", y0(x));
        assert!(close(y1(x), y1v, 1e-12), "Y1({x}) = {}", y1(x));
    }
}

#[test]
fn integer_order_arrays_match_reference_values() {
    let (j, y) = bessel_jy_arrays(5.0, 12);
    for n in 0..=12 {
        assert!(close(j[n], JN_5[n], 1e-11), "J{n}(5) = {}", j[n]);
        assert!(close(y[n], YN_5[n], 1e-11), "Y{n}(5) = {}", y[n]);
    }
    let j = bessel_j_array(0.3, 6);
    for n in 0..=6 {
        assert!(close(j[n], JN_03[n], 1e-11), "J{n}(0.3) = {}", j[n]);
    }
}

#[test]
fn hankel_is_j_minus_jy() {
    for x in [0.2, 3.0, 40.0] {
        let h0 = hankel2_0(x);
        let h1 = hankel2_1(x);
        assert_eq!(h0, c(j0(x), -y0(x)));
        assert_eq!(h1, c(j1(x), -y1(x)));
    }
}

#[test]
fn erf_reference_values() {
    let cases = [
        ((0.5, 0.5), (0.64261291485482053, 0.45788139443519222)),
        ((2.0, -1.0), (1.0036063427256518, 0.011259006028815025)),
        ((-1.5, 3.0), (-118.8559040465755, -88.120890671506464)),
        ((4.0, 0.3), (1.000000013182743, 1.0460868310870077e-8)),
        ((0.1, -5.0), (6817477771.5138365, -4581362884.0523508)),
        ((0.001, 0.002), (0.0011283833044904183, 0.0022567590864395154)),
        ((6.0, -6.0), (1.0576342401356786, 0.0331391147411565)),
    ];
    for ((x, y), (re, im)) in cases {
        let v = erf_complex(c(x, y)).unwrap();
        assert!(rel(v, c(re, im)) < 1e-12, "erf({x}{y:+}j) = {v}");
    }
}

#[test]
fn erf_is_odd_real_on_the_real_line_and_zero_at_origin() {
    assert_eq!(erf_complex(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    for x in [-3.0, -0.7, 0.2, 1.9, 5.5] {
        assert_eq!(erf_complex(c(x, 0.0)).unwrap().im, 0.0);
    }
    for (x, y) in [(0.3, 0.4), (1.7, -2.2), (-0.5, 3.1), (4.0, 1.0), (2.0, 2.0)] {
        let a = erf_complex(c(x, y)).unwrap();
        let b = erf_complex(c(-x, -y)).unwrap();
        assert!((a + b).norm() <= 1e-14 * a.norm().max(1.0));
    }
}

#[test]
fn erf_matches_maclaurin_series_inside_unit_disk() {
    let series = |z: gabor_ewald::Complex64| {
        let mut sum = c(0.0, 0.0);
        let mut pow = z;
        let mut fact = 1.0;
        for n in 0..15 {
            if n > 0 {
                fact *= n as f64;
                pow *= -z * z;
            }
            sum += pow / (fact * (2 * n + 1) as f64);
        }
        sum * 2.0 / PI.sqrt()
    };
    for z in [c(1.0, 0.0), c(0.6, 0.6), c(-0.2, 0.9), c(0.0, -1.0)] {
        let v = erf_complex(z).unwrap();
        assert!((v - series(z)).norm() < 1e-12, "erf({z})");
    }
}

#[test]
fn erf_guards_against_overflow() {
    assert!(matches!(erf_complex(c(0.0, 40.0)), Err(Error::OverflowGuard { .. })));
    assert!(matches!(erf_complex(c(f64::NAN, 0.0)), Err(Error::OverflowGuard { .. })));
}

#[test]
fn exact_green_reference_value() {
    let g = green_exact(1.0, 1.45).unwrap();
    assert!(rel(g, c(-0.090251849323403639, -0.13488532009959961)) < 1e-13, "{g}");
    assert!(matches!(green_exact(0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(green_exact(-1.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn exact_green_sign_near_origin() {
    // Im(4j G) = -Y0, which grows to +∞ as R → 0.
    let v = green_exact(1e-6, 1.45).unwrap() * c(0.0, 4.0);
    assert!(v.im > 8.0, "{v}");
    assert!((v.re - 1.0).abs() < 1e-9);
}

#[test]
fn exact_green_large_argument_magnitude() {
    let k0 = 1.45;
    let r = 50.0 / k0;
    let g = green_exact(r, k0).unwrap().norm();
    let asym = 0.25 * (2.0 / (PI * 50.0)).sqrt();
    assert!((g / asym - 1.0).abs() < 0.01);
}

#[test]
fn contour_examples() {
    let e = 4.0;
    assert_eq!(xi_path(e / 4.0, e), c(1.0, 1.0));
    assert_eq!(xi_path(e, e), c(e, 0.0));
    assert_eq!(xi_path(2.0 * e, e), c(2.0 * e, 0.0));
    assert!(rel(zeta_path(1.0 / e, e), c(1.0 / e, 0.0)) < 1e-15);
    let junction = c(1.0, -1.0) / e;
    assert!(rel(zeta_path(2.0 / e, e), junction) < 1e-15);
    assert!(rel(zeta_path(2.0 / e + 1e-13, e), junction) < 1e-12);
    for w in [1.1 / e, 1.5 / e, 1.99 / e, 3.0 / e, 50.0 / e] {
        let prod = zeta_path(w, e) * xi_path(1.0 / w, e);
        assert!((prod - 1.0).norm() < 1e-14, "w = {w}: {prod}");
    }
}

#[test]
fn contour_keeps_real_part_of_xi_squared_nonnegative() {
    // The first leg (1+j)w has Re ξ² = 0 exactly; convergence there
    // comes from e^{k0²/4ξ²} and the oscillation of e^{-R²ξ²}.
    let e = optimal_split(1.45, 0.05);
    for i in 0..=400 {
        let w = 1e-12 + 3.0 * e * i as f64 / 400.0;
        let xi = xi_path(w, e);
        assert!((xi * xi).re >= -1e-12 * (xi * xi).norm(), "w = {w}");
    }
    for i in 0..=400 {
        let w = (1.0 + 99.0 * i as f64 / 400.0) / e;
        let z = zeta_path(w, e);
        assert!((z * z).re >= -1e-12 * (z * z).norm(), "w = {w}");
    }
}

#[test]
fn optimal_split_values_and_balance() {
    assert!((optimal_split(1.45, 0.05) - 4.528365781869865).abs() < 1e-13);
    assert!((optimal_split(1.5, 0.05) - 2f64.powf(-0.25) * 30f64.sqrt()).abs() < 1e-13);
    assert!((optimal_split(1.5, 0.05) - 4.6057793515969071).abs() < 1e-13);
    for (k0, delta) in [(0.8388, 0.05), (1.45, 0.05), (1.5, 0.05), (3.0, 0.01)] {
        let e: f64 = optimal_split(k0, delta);
        let lhs = delta * delta * e * e;
        let rhs = k0 * k0 / (2.0 * e * e);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs, "k0 = {k0}");
    }
}

#[test]
fn split_identity_at_sample_distances() {
    let k0 = 1.45;
    let cfg = EwaldConfig::optimal(k0, 0.05).unwrap();
    for kr in [0.05, 0.5, 1.0, 5.0, 20.0] {
        let r = kr / k0;
        let total = green_spatial(r, 0.0, &cfg).unwrap() + green_spectral(r, 0.0, &cfg).unwrap();
        let exact = green_exact(r, k0).unwrap();
        assert!(rel(total, exact) < 1e-8, "k0 R = {kr}: {total} vs {exact}");
    }
}

#[test]
fn split_total_is_independent_of_the_split_point() {
    let k0 = 0.8388;
    let base = EwaldConfig::optimal(k0, 0.05).unwrap();
    let double = EwaldConfig::new(2.0 * base.split, k0, base.quad_tol, base.trunc_tol).unwrap();
    for r in [0.1, 1.3, 7.0] {
        let a = green_spatial(r, 0.0, &base).unwrap() + green_spectral(r, 0.0, &base).unwrap();
        let b = green_spatial(r, 0.0, &double).unwrap() + green_spectral(r, 0.0, &double).unwrap();
        assert!(rel(a, b) < 1e-8, "R = {r}");
    }
}

#[test]
fn split_parts_depend_only_on_distance() {
    let cfg = EwaldConfig::optimal(1.5, 0.05).unwrap();
    let a = green_spatial(0.3, 0.4, &cfg).unwrap();
    let b = green_spatial(0.5, 0.0, &cfg).unwrap();
    assert!(rel(a, b) < 1e-12);
    for (dx, dz) in [(0.6, 0.8), (-0.28, 0.96), (1.0, 0.0)] {
        let s = green_spectral(dx, dz, &cfg).unwrap();
        let t = green_spectral(0.0, 1.0, &cfg).unwrap();
        assert!(rel(s, t) < 1e-12);
        assert!(rel(green_spatial(dx, dz, &cfg).unwrap(), green_spatial(0.0, 1.0, &cfg).unwrap()) < 1e-12);
    }
}

#[test]
fn spatial_part_is_finite_at_zero_distance() {
    let cfg = EwaldConfig::optimal(1.45, 0.05).unwrap();
    let v = green_spatial(0.0, 0.0, &cfg).unwrap();
    assert!(v.re.is_finite() && v.im.is_finite());
    assert!(matches!(green_spectral(0.0, 0.0, &cfg), Err(Error::Domain(_))));
}

#[test]
fn ewald_config_validation() {
    assert!(EwaldConfig::new(4.0, 1.0, 1e-10, 1e-14).is_ok());
    assert!(EwaldConfig::new(0.0, 1.0, 1e-10, 1e-14).is_err());
    assert!(EwaldConfig::new(4.0, -1.0, 1e-10, 1e-14).is_err());
    assert!(EwaldConfig::new(4.0, 1.0, 1.5, 1e-14).is_err());
    assert!(EwaldConfig::new(4.0, 1.0, 1e-10, 0.0).is_err());
}
