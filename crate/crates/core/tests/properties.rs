use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use phi4_lambert::closedform::{g_real, lambert_k, lambert_k_complex};
use phi4_lambert::domains::{branch_index_lambda, branch_phase, in_omega_k};
use phi4_lambert::oracle::solve_fixed_point;
use phi4_lambert::quadrature::{hilbert_finite, QuadSpec};
use phi4_lambert::special::{lambert_w, lambert_w_real, BRANCH_POINT};
use phi4_lambert::INV_LOG4;

fn complex_point() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -PI..PI).prop_map(|(e, t)| Complex64::from_polar(10f64.powf(e), t))
}

proptest! {
    #[test]
    fn lambert_w_solves_its_equation(k in -2i32..=2, z in complex_point()) {
        let w = lambert_w(k, z).unwrap();
        prop_assert!((w * w.exp() - z).norm() <= 1e-12 * (1.0 + z.norm()), "W_{}({}) = {}", k, z, w);
    }

    #[test]
    fn lambert_w_conjugation(k in -2i32..=2, z in complex_point()) {
        prop_assume!(z.im.abs() > 1e-9 * z.norm());
        let lhs = lambert_w(k, z.conj()).unwrap();
        let rhs = lambert_w(-k, z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn lambert_w0_increasing(x in BRANCH_POINT..1e3, dx in 1e-6..10.0f64) {
        prop_assert!(lambert_w_real(0, x).unwrap() < lambert_w_real(0, x + dx).unwrap());
    }

    #[test]
    fn k_functional_equation(a in 0.0..50.0f64, lambda in -0.999..50.0f64) {
        prop_assume!(lambda != 0.0);
        let k = lambert_k(a, lambda).unwrap();
        prop_assert!((k + lambda * (1.0 + a + k).ln()).abs() <= 1e-12 * (1.0 + k.abs()));
    }

    #[test]
    fn complex_k_functional_equation(
        a in prop::sample::select(vec![0.0, 1.0, 5.0]),
        r in 0.05..20.0f64,
        phi in -PI..PI,
    ) {
        let lambda = Complex64::from_polar(r, phi);
        prop_assume!(in_omega_k(lambda) && lambda.im != 0.0);
        prop_assume!(!branch_index_lambda(a, lambda).unwrap().on_threshold);
        let z = Complex64::new(a, 0.0);
        let k = lambert_k_complex(z, lambda).unwrap();
        let resid = (k + lambda * (1.0 + z + k).ln()).norm();
        prop_assert!(resid <= 1e-10 * (1.0 + k.norm()), "λ = {}: {:e}", lambda, resid);
    }

    #[test]
    fn branch_index_locally_constant(
        a in prop::sample::select(vec![0.0, 1.0, 5.0]),
        r in 0.1..20.0f64,
        phi in -PI..PI,
        theta in -PI..PI,
    ) {
        let lambda = Complex64::from_polar(r, phi);
        let nearby = lambda + Complex64::from_polar(1e-6, theta);
        prop_assume!(lambda.im.abs() > 1e-5);
        // Keep both points well clear of every threshold Y = 2kπ.
        for l in [lambda, nearby] {
            let y = branch_phase(a, l) / (2.0 * PI);
            prop_assume!((y - y.round()).abs() > 1e-3);
        }
        prop_assert_eq!(branch_index_lambda(a, lambda).unwrap().k, branch_index_lambda(a, nearby).unwrap().k);
    }

    #[test]
    fn hilbert_transform_is_linear(
        c in prop::array::uniform4(-2.0..2.0f64),
        s in -3.0..3.0f64,
        t in -3.0..3.0f64,
        b in 0.05..0.95f64,
    ) {
        let spec = QuadSpec::default();
        let f = move |p: f64| c[0] * (c[1] * p).sin() + c[2];
        let g = move |p: f64| (-c[3] * p).exp();
        let combined = hilbert_finite(|p: f64| s * f(p) + t * g(p), b, 0.0, 1.0, &spec).unwrap();
        let separate = s * hilbert_finite(f, b, 0.0, 1.0, &spec).unwrap() + t * hilbert_finite(g, b, 0.0, 1.0, &spec).unwrap();
        prop_assert!((combined - separate).abs() <= 1e-10 * (1.0 + separate.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn g_symmetric_and_positive(a in 0.0..10.0f64, b in 0.0..10.0f64, lambda in (-INV_LOG4 + 1e-3)..5.0f64) {
        let g = g_real(a, b, lambda).unwrap();
        let h = g_real(b, a, lambda).unwrap();
        prop_assert!(g > 0.0);
        prop_assert!((g - h).abs() <= 1e-12 * g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    // Small cutoffs near λ = 1 and grids under 32 nodes do not converge.
    #[test]
    fn oracle_grid_symmetric_and_positive(lambda in 0.05..=1.0f64, cutoff in 10.0..50.0f64) {
        let grid = solve_fixed_point(lambda, cutoff, 32, 0.5, 1e-10, 5000).unwrap();
        for (i, row) in grid.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert_eq!(v, grid.values[j][i]);
                prop_assert!(v > 0.0 && v.is_finite());
            }
        }
        prop_assert!(grid.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
