//! Where the λ-series of `G(0,0,λ)` and `N(0,0,λ)` stop converging.
//!
//! `N` has a logarithmic singularity at `λ = -1/log 4`, so `G = e^N` only has a
//! simple zero there and its own series reaches further.

use num_complex::Complex64;
use phi4_lambert::closedform::{g_real, n_lambda_complex};
use phi4_lambert::quadrature::QuadSpec;
use phi4_lambert::series::{g_lambda_coeffs, lambda_taylor, radius_estimate};
use phi4_lambert::INV_LOG4;

#[test]
fn n_series_radius_is_inverse_log_four() {
    let zero = Complex64::new(0.0, 0.0);
    let spec = QuadSpec::default();
    let c = lambda_taylor(|l| n_lambda_complex(zero, zero, l, &spec).map(|v| v.0), 0.6, 40, 256).unwrap();
    let r = radius_estimate(&c, 12).unwrap();
    assert!((r / INV_LOG4 - 1.0).abs() < 0.01, "{r}");
}

#[test]
fn g_vanishes_linearly_at_the_left_end() {
    let slope: Vec<f64> = [1e-3, 1e-4].iter().map(|&e| g_real(0.0, 0.0, -INV_LOG4 + e).unwrap() / e).collect();
    assert!((slope[0] / slope[1] - 1.0).abs() < 0.01, "{slope:?}");
}

#[test]
fn g_series_radius_is_near_one() {
    let c = g_lambda_coeffs(0.0, 0.0, 40).unwrap();
    let r = radius_estimate(&c, 12).unwrap();
    assert!((r - 1.0).abs() < 0.05, "{r}");
}
