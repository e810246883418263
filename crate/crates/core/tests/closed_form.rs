use std::f64::consts::PI;

use phi4_lambert::closedform::{angle_tau, lambert_k, lambert_l, lambert_w0_series};
use phi4_lambert::special::lambert_w_real;

#[test]
fn k_and_l_satisfy_their_pdes() {
    let (a, l, h) = (1.0, 0.5, 1e-4);
    let d = |f: &dyn Fn(f64, f64) -> f64, da: f64, dl: f64| (f(a + da, l + dl) - f(a - da, l - dl)) / (2.0 * h);
    let k = |a: f64, l: f64| lambert_k(a, l).unwrap();
    let ll = |a: f64, l: f64| lambert_l(a, l).unwrap();
    let (ka, kl) = (d(&k, h, 0.0), d(&k, 0.0, h));
    let (la, lla) = (d(&ll, h, 0.0), d(&ll, 0.0, h));
    let kv = k(a, l);
    assert!(((1.0 + a + l) * ka + l * kl - kv + l).abs() < 1e-6);
    assert!((a * la + l * lla - ka).abs() < 1e-6);
}

#[test]
fn cot_of_angle_is_affine_in_b() {
    for lambda in [0.3, 1.0, 4.0, -0.5] {
        for a in [0.01, 0.7, 3.0] {
            for b in [0.5, 2.0, 9.0] {
                let t0 = angle_tau(0.0, a, lambda).unwrap();
                let tb = angle_tau(b, a, lambda).unwrap();
                let gap = 1.0 / tb.tan() - 1.0 / t0.tan() - b / (lambda * PI);
                assert!(gap.abs() < 1e-8 * (1.0 + b / (lambda * PI)).abs(), "λ={lambda} a={a} b={b}: {gap:e}");
            }
        }
    }
}

#[test]
fn strong_coupling_series_converges() {
    let (a, lambda) = (1.0f64, 10.0f64);
    let z = ((1.0 + a) / lambda).exp() / lambda;
    assert!((lambert_w0_series(z, 40) - lambert_w_real(0, z).unwrap()).abs() < 1e-10);
}
