use num_complex::Complex64;
use phi4_lambert::special::{
    dilog, dilog_real, dilog_side, hyp2f1, lambert_w, lambert_w0_exp, lambert_w_real, nielsen, Side, BRANCH_POINT, ZETA2,
};
use phi4_lambert::Error;

// Reference values frozen from mpmath at 30 digits.

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

#[test]
fn lambert_w_reference_values() {
    assert!((lambert_w_real(0, 1.0).unwrap() - 0.567_143_290_409_783_9).abs() < 1e-15);
    assert!((lambert_w_real(-1, -0.2).unwrap() + 2.542_641_357_773_526_3).abs() < 1e-14);
    let w = lambert_w(1, Complex64::new(1.0, 2.0)).unwrap();
    assert!(close(w, Complex64::new(-0.941_414_382_865_558_2, 5.654_563_302_832_61), 1e-14), "{w}");
    let w = lambert_w(-2, Complex64::new(-3.0, 0.5)).unwrap();
    assert!(close(w, Complex64::new(-0.961_651_914_810_703_1, -7.897_967_304_441_863_7), 1e-14), "{w}");
}

#[test]
fn lambert_w_branch_point_and_real_branches() {
    assert!((lambert_w_real(0, BRANCH_POINT).unwrap() + 1.0).abs() < 1e-7);
    assert!((lambert_w_real(-1, BRANCH_POINT).unwrap() + 1.0).abs() < 1e-7);
    assert!(matches!(lambert_w_real(0, -0.5), Err(Error::Domain(_))));
    assert!(matches!(lambert_w_real(-1, 0.5), Err(Error::Domain(_))));
    assert!(matches!(lambert_w_real(1, 0.5), Err(Error::Domain(_))));
    assert!(lambert_w_real(0, f64::NAN).is_err());
}

#[test]
fn lambert_w_of_huge_exponential() {
    // W_0(e^50) without forming e^50.
    assert!((lambert_w0_exp(50.0).unwrap() - 46.167_719_165_492_09).abs() < 1e-12);
    let w = lambert_w0_exp(1000.0).unwrap();
    assert!((w + w.ln() - 1000.0).abs() < 1e-12);
}

#[test]
fn dilog_reference_values() {
    assert!((dilog_real(-1.5) + 1.147_380_660_375_570_8).abs() < 1e-14);
    assert!((dilog_real(0.9) - 1.299_714_723_004_958_8).abs() < 1e-14);
    assert!((dilog_real(1.0) - ZETA2).abs() < 1e-14);
    let z = dilog(Complex64::new(0.5, 0.7));
    assert!(close(z, Complex64::new(0.359_364_350_522_653_2, 0.856_767_712_327_590_5), 1e-14), "{z}");
    // On the cut the imaginary part flips with the side of approach.
    let up = dilog_side(Complex64::new(2.0, 0.0), Side::Upper);
    let down = dilog_side(Complex64::new(2.0, 0.0), Side::Lower);
    assert!(close(up, Complex64::new(2.467_401_100_272_339_7, 2.177_586_090_303_602), 1e-14), "{up}");
    assert!(close(down, up.conj(), 1e-15));
}

#[test]
fn nielsen_reference_values() {
    for (n, p, z, want) in [
        (1, 2, 0.5, 0.094_753_004_230_127_71),
        (2, 2, -1.0, 0.087_785_671_568_655_3),
        (3, 1, 0.7, 0.736_217_240_949_138_4),
        (1, 1, -2.0, -1.436_746_366_883_680_9),
    ] {
        let got = nielsen(n, p, z).unwrap();
        assert!((got - want).abs() < 1e-12, "S_{{{n},{p}}}({z}) = {got}, want {want}");
    }
    assert!(nielsen(0, 1, 0.5).is_err());
    assert!(nielsen(1, 1, 1.5).is_err());
}

#[test]
fn nielsen_generating_function() {
    // Truncation at n, p ≤ 4 leaves O(0.1⁵) for |x|, |y| ≤ 0.1; use 0.05 for headroom.
    for z in [-1.0, -0.5, 0.5] {
        for (x, y) in [(0.05f64, 0.05f64), (-0.05, 0.03), (0.02, -0.05)] {
            let mut sum = 0.0;
            for n in 1..=4u32 {
                for p in 1..=4u32 {
                    sum += nielsen(n, p, z).unwrap() * x.powi(n as i32) * y.powi(p as i32);
                }
            }
            let f = hyp2f1(-x, y, 1.0 - x, z).unwrap();
            assert!((f - (1.0 - sum)).abs() < 1e-6, "z={z} x={x} y={y}: {f} vs {}", 1.0 - sum);
        }
    }
}

#[test]
fn hyp2f1_reference_values() {
    assert!((hyp2f1(-0.3, 0.4, 0.7, -0.8).unwrap() - 1.114_153_989_484_839_6).abs() < 1e-12);
    assert!((hyp2f1(0.5, 0.5, 1.5, 0.9).unwrap() - 1.316_609_847_527_586).abs() < 1e-10);
    assert!(hyp2f1(0.5, 0.5, 1.5, 1.0).is_err());
}
