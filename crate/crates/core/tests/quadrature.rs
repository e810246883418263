use std::f64::consts::PI;

use num_complex::Complex64;
use phi4_lambert::quadrature::{
    hilbert_finite, hilbert_halfline, integrate, integrate_complex, integrate_halfline, principal_value, tau_identity_check,
    tricomi_outside_check, QuadSpec,
};
use phi4_lambert::Error;

// Reference values frozen from mpmath at 25 digits.

#[test]
fn endpoint_log_singularity() {
    let r = integrate(|x: f64| x.sqrt() * x.ln(), 0.0, 1.0, &QuadSpec::default()).unwrap();
    let err = (r.value + 4.0 / 9.0).abs();
    assert!(err < 1e-10 && err <= r.err_estimate.max(1e-15), "{r:?}");
}

#[test]
fn half_line_with_mapped_tail() {
    let spec = QuadSpec { tail_cutoff: 10.0, ..QuadSpec::default() };
    let r = integrate_halfline(|x: f64| (-x).exp() / (1.0 + x), 0.0, &[], &spec).unwrap();
    assert!((r.value - 0.596_347_362_323_194_1).abs() < 1e-11);
}

#[test]
fn complex_integrand() {
    let r = integrate_complex(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, &QuadSpec::default()).unwrap();
    assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
}

#[test]
fn principal_value_of_a_constant_is_a_log() {
    let spec = QuadSpec::default();
    for pole in [0.1, 0.5, 0.93] {
        let r = principal_value(|_| 1.0, 0.0, 1.0, pole, &spec).unwrap();
        assert!((r.value - ((1.0 - pole) / pole).ln()).abs() < 1e-12, "pole {pole}");
    }
    assert!(matches!(principal_value(|_| 1.0, 0.0, 1.0, 1.0, &spec), Err(Error::Domain(_))));
}

#[test]
fn hilbert_transforms_reference_values() {
    let spec = QuadSpec::default();
    let h = hilbert_halfline(|p: f64| 1.0 / ((1.0 + p) * (1.0 + p)), 1.5, &spec).unwrap();
    assert!((h + 0.147_974_122_859_661_6).abs() < 1e-10, "{h}");
    let h = hilbert_finite(|p: f64| (-p).exp(), 0.7, 0.0, 1.0, &spec).unwrap();
    assert!((h + 0.311_486_270_138_563_8).abs() < 1e-10, "{h}");
    // Outside the interval the transform is an ordinary integral.
    let h = hilbert_finite(|_| 1.0, 2.0, 0.0, 1.0, &spec).unwrap();
    assert!((h - 0.5f64.ln() / PI).abs() < 1e-12);
}

#[test]
fn non_decaying_hilbert_integrand_is_rejected() {
    assert!(matches!(hilbert_halfline(|_| 1.0, 1.0, &QuadSpec::default()), Err(Error::Domain(_))));
}

#[test]
fn invalid_spec_is_a_configuration_error() {
    let spec = QuadSpec { abs_tol: 0.0, ..QuadSpec::default() };
    assert!(matches!(integrate(|x| x, 0.0, 1.0, &spec), Err(Error::Config(_))));
}

#[test]
fn tau_identity_and_outside_tricomi() {
    let spec = QuadSpec::with_tol(1e-10);
    let lambda2 = 10.0;
    let tau = |p: f64| 0.5 * (PI * p / lambda2).sin().powi(2);
    let (plus, minus) = tau_identity_check(tau, lambda2, &spec).unwrap();
    assert!(plus.abs() < 1e-6 && minus.abs() < 1e-6, "{plus} {minus}");
    let r = tricomi_outside_check(tau, lambda2, 2.0 * lambda2, &spec).unwrap();
    assert!(r.abs() < 1e-6, "{r}");
    assert!(tricomi_outside_check(tau, lambda2, 5.0, &spec).is_err());
}
