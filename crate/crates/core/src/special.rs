//! Lambert W on every branch, the dilogarithm, and Nielsen's generalised
//! polylogarithms `S_{n,p}`.
//!
//! Branch convention for `W_k`: each branch is holomorphic off `(-∞, 0]`
//! (`(-∞, -1/e]` for `k = 0`), and the value on a cut is the limit from the
//! side selected by [`Side`]. With `Side::Upper`, `W_0` and `W_{-1}` are real
//! on `[-1/e, 0)`. `W_k(z̄) = conj W_{-k}(z)` off the cuts.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::error::{domain, no_convergence, Result};
use crate::quadrature::{integrate_breaks, QuadSpec};

/// `-1/e`, the common branch point of `W_0` and `W_{±1}`.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// `ζ(2) = π²/6`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Side from which a branch cut is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    /// `x + i0`
    #[default]
    Upper,
    /// `x - i0`
    Lower,
}

const MAX_HALLEY: usize = 100;

fn halley_real(x: f64, mut w: f64) -> Result<f64> {
    for _ in 0..MAX_HALLEY {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            return Ok(w);
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - dw;
        if !next.is_finite() {
            return no_convergence(format!("Lambert W iteration diverged at x = {x}"));
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// Real `W_k(x)` for `k ∈ {0, -1}`.
///
/// `W_0` needs `x ≥ -1/e` and returns `w ≥ -1`; `W_{-1}` needs
/// `-1/e ≤ x < 0` and returns `w ≤ -1`.
pub fn lambert_w_real(k: i32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("Lambert W argument must be finite, got {x}"));
    }
    // Tolerate arguments a few ulps below -1/e produced by rounding.
    let near_bp = x - BRANCH_POINT;
    if near_bp < -4.0 * f64::EPSILON {
        return domain(format!("real W_{k} needs x ≥ -1/e, got {x}"));
    }
    let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    match k {
        0 => {
            if x == 0.0 {
                return Ok(0.0);
            }
            if p == 0.0 {
                return Ok(-1.0);
            }
            if x > 1e100 {
                // w + ln w = ln x, Newton in log form.
                let lx = x.ln();
                let mut w = lx - lx.ln();
                for _ in 0..MAX_HALLEY {
                    let next = w - (w + w.ln() - lx) * w / (w + 1.0);
                    if (next - w).abs() <= 4.0 * f64::EPSILON * next {
                        return Ok(next);
                    }
                    w = next;
                }
                return Ok(w);
            }
            let guess = if near_bp < 0.3 {
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if x.abs() < 0.5 {
                x - x * x + 1.5 * x * x * x
            } else if x < 3.0 {
                let l = (1.0 + x).ln();
                l * (1.0 - (1.0 + l).ln() / (2.0 + l))
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            };
            halley_real(x, guess)
        }
        -1 => {
            if x >= 0.0 {
                return domain(format!("real W_-1 needs -1/e ≤ x < 0, got {x}"));
            }
            if p == 0.0 {
                return Ok(-1.0);
            }
            let guess = if near_bp < 0.25 {
                -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            };
            halley_real(x, guess)
        }
        _ => domain(format!("W_{k} is not real-valued; only k = 0 and k = -1 are")),
    }
}

/// `W_0(e^y)` without forming `e^y`: the root of `w + ln w = y`.
pub fn lambert_w0_exp(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return domain(format!("lambert_w0_exp needs finite y, got {y}"));
    }
    if y < 300.0 {
        return lambert_w_real(0, y.exp());
    }
    let mut w = y - y.ln();
    for _ in 0..MAX_HALLEY {
        let next = w - (w + w.ln() - y) * w / (w + 1.0);
        if (next - w).abs() <= 4.0 * f64::EPSILON * next {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// `W_{-1}(-e^y)` for `y ≤ -1` without forming `e^y`: `-t` with `t - ln t = -y`, `t ≥ 1`.
pub fn lambert_wm1_negexp(y: f64) -> Result<f64> {
    if !(y <= -1.0) {
        return domain(format!("W_-1(-e^y) needs y ≤ -1, got {y}"));
    }
    if y > -300.0 {
        return lambert_w_real(-1, -(y.exp()));
    }
    let s = -y;
    let mut t = s + s.ln();
    for _ in 0..MAX_HALLEY {
        let next = t - (t - t.ln() - s) * t / (t - 1.0);
        if (next - t).abs() <= 4.0 * f64::EPSILON * next {
            return Ok(-next);
        }
        t = next;
    }
    Ok(-t)
}

fn halley_complex(z: Complex64, mut w: Complex64) -> Option<Complex64> {
    for _ in 0..MAX_HALLEY {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.norm() == 0.0 {
            return Some(w);
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (wp1 * 2.0));
        let next = w - dw;
        if !(next.re.is_finite() && next.im.is_finite()) {
            return None;
        }
        if (next - w).norm() <= 4.0 * f64::EPSILON * (1.0 + next.norm()) {
            return Some(next);
        }
        w = next;
    }
    // Accept a limit cycle at rounding level.
    let r = (w * w.exp() - z).norm();
    (r <= 1e-13 * (1.0 + z.norm())).then_some(w)
}

fn initial_guesses(k: i32, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(3);
    let two_pi_k = Complex64::new(0.0, 2.0 * PI * k as f64);
    let near_bp = (z - BRANCH_POINT).norm() < 0.3;
    let p = ((z * E + 1.0) * 2.0).sqrt();
    let bp_branch = |sgn: f64| -> Complex64 {
        let q = p * sgn;
        Complex64::new(-1.0, 0.0) + q - q * q / 3.0 + q * q * q * (11.0 / 72.0)
    };
    if k == 0 {
        if near_bp {
            out.push(bp_branch(1.0));
        }
        if z.norm() < 0.5 {
            out.push(z - z * z + z * z * z * 1.5);
        }
        let l = (z + 1.0).ln();
        out.push(l * (Complex64::new(1.0, 0.0) - (l + 1.0).ln() / (l + 2.0)));
    } else if near_bp && ((k == -1 && z.im >= 0.0) || (k == 1 && z.im < 0.0)) {
        out.push(bp_branch(-1.0));
    }
    let l1 = z.ln() + two_pi_k;
    let l2 = l1.ln();
    out.push(l1 - l2 + l2 / l1);
    out
}

/// `W_k(z)` + `ln W_k(z)` = `ln z + 2πik` holds off the real axis; used to
/// confirm that Halley converged on the requested sheet.
fn on_branch(k: i32, z: Complex64, w: Complex64) -> bool {
    let lhs = w + w.ln() - z.ln();
    (lhs.im - 2.0 * PI * k as f64).abs() < 1e-6 && lhs.re.abs() < 1e-6 * (1.0 + z.norm().ln().abs())
}

/// `W_k(z)`, approaching cuts from above.
pub fn lambert_w(k: i32, z: Complex64) -> Result<Complex64> {
    lambert_w_side(k, z, Side::Upper)
}

/// `W_k(z)` with explicit cut side.
///
/// Points with `Im z = 0` and `Re z < 0` are treated as lying on the cut and
/// resolved by `side`; `W_k(x - i0) = conj W_{-k}(x + i0)`.
pub fn lambert_w_side(k: i32, z: Complex64, side: Side) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return domain(format!("Lambert W argument must be finite, got {z}"));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return if k == 0 { Ok(Complex64::new(0.0, 0.0)) } else { domain(format!("W_{k}(0) is infinite")) };
    }
    if z.im == 0.0 {
        if z.re < 0.0 && side == Side::Lower {
            return lambert_w_side(-k, Complex64::new(z.re, 0.0), Side::Upper).map(|w| w.conj());
        }
        // Normalise -0.0 so that ln picks the upper side.
        let x = z.re;
        if (k == 0 && x >= BRANCH_POINT) || (k == -1 && (BRANCH_POINT..0.0).contains(&x)) {
            return lambert_w_real(k, x).map(|w| Complex64::new(w, 0.0));
        }
        let zu = Complex64::new(x, 0.0);
        for g in initial_guesses(k, zu) {
            if let Some(w) = halley_complex(zu, g) {
                if strip_contains(k, w) {
                    return Ok(w);
                }
            }
        }
        return no_convergence(format!("W_{k}({x} + i0) did not converge"));
    }
    for g in initial_guesses(k, z) {
        if let Some(w) = halley_complex(z, g) {
            if on_branch(k, z, w) {
                return Ok(w);
            }
        }
    }
    // Last resort: march from a far point along a ray where the asymptotic guess is reliable.
    let far = z * (1e6 / z.norm());
    let mut w = halley_complex(far, initial_guesses(k, far)[initial_guesses(k, far).len() - 1]);
    for j in 1..=60 {
        let t = 1.0 - j as f64 / 60.0;
        let zj = far * t + z * (1.0 - t);
        w = w.and_then(|w0| halley_complex(zj, w0));
    }
    match w {
        Some(w) if on_branch(k, z, w) => Ok(w),
        _ => no_convergence(format!("W_{k}({z}) did not converge on the requested branch")),
    }
}

/// Loose imaginary-part strip of branch `k`.
pub fn strip_contains(k: i32, w: Complex64) -> bool {
    let (lo, hi) = match k {
        0 => (-PI, PI),
        k if k > 0 => ((2 * k - 2) as f64 * PI, (2 * k + 1) as f64 * PI),
        k => ((2 * k - 1) as f64 * PI, (2 * k + 2) as f64 * PI),
    };
    w.im >= lo - 1e-12 && w.im <= hi + 1e-12
}

/// `Σ B_n u^{n+1}/(n+1)!`, the dilogarithm in the variable `u = -ln(1-z)`.
/// Coefficients `B_{2j}/(2j+1)!`, `j ≥ 1`.
const DILOG_BERNOULLI: [f64; 15] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211_680.0,
    -1.0 / 10_886_400.0,
    1.0 / 526_901_760.0,
    -4.064_761_645_144_225_5e-11,
    8.921_691_020_456_452_6e-13,
    -1.993_929_586_072_107_5e-14,
    4.518_980_029_619_918_2e-16,
    -1.035_651_761_218_124_7e-17,
    2.395_218_621_026_186_7e-19,
    -5.581_785_874_325_009_3e-21,
    1.309_150_755_418_321_8e-22,
    -3.087_419_802_426_740_3e-24,
    7.315_975_652_702_203e-26,
];

fn dilog_bernoulli(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut sum = u - u2 * 0.25;
    let mut pow = u * u2;
    for c in DILOG_BERNOULLI {
        sum += pow * c;
        pow *= u2;
    }
    sum
}

/// `Li₂(z)` on the principal sheet; the cut `(1, ∞)` is approached from above.
pub fn dilog(z: Complex64) -> Complex64 {
    dilog_side(z, Side::Upper)
}

/// `Li₂(z)` with explicit side for real `z > 1`.
pub fn dilog_side(z: Complex64, side: Side) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if z.im == 0.0 {
        let x = z.re;
        if x > 1.0 {
            let l = x.ln();
            let re = PI * PI / 3.0 - 0.5 * l * l - dilog_real(1.0 / x);
            let im = PI * l;
            return Complex64::new(re, if side == Side::Upper { im } else { -im });
        }
        return Complex64::new(dilog_real(x), 0.0);
    }
    if z.norm() > 1.0 {
        let lmz = (-z).ln();
        return -dilog_inner(one / z) - ZETA2 - lmz * lmz * 0.5;
    }
    dilog_inner(z)
}

/// `|z| ≤ 1`, off the real axis or real.
fn dilog_inner(z: Complex64) -> Complex64 {
    if z.re > 0.5 {
        let one = Complex64::new(1.0, 0.0);
        return -dilog_bernoulli(one - z) + ZETA2 - z.ln() * (one - z).ln();
    }
    dilog_bernoulli(z)
}

/// Real `Li₂(x)` for `x ≤ 1`.
pub fn dilog_real(x: f64) -> f64 {
    if x == 1.0 {
        return ZETA2;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > 1.0 {
        return dilog_side(Complex64::new(x, 0.0), Side::Upper).re;
    }
    if x < -1.0 {
        let l = (-x).ln();
        return -dilog_real(1.0 / x) - ZETA2 - 0.5 * l * l;
    }
    if x > 0.5 {
        return -dilog_real(1.0 - x) + ZETA2 - x.ln() * (-x).ln_1p();
    }
    dilog_bernoulli(Complex64::new(x, 0.0)).re
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Nielsen's generalised polylogarithm
/// `S_{n,p}(z) = (-1)^{n+p-1}/((n-1)! p!) ∫_0^1 ln^{n-1}(t) ln^p(1-zt)/t dt`
/// for real `z ≤ 1`. `S_{n,1} = Li_{n+1}`.
pub fn nielsen(n: u32, p: u32, z: f64) -> Result<f64> {
    if n == 0 || p == 0 {
        return domain(format!("Nielsen S_{{n,p}} needs n, p ≥ 1, got ({n}, {p})"));
    }
    if !(z <= 1.0) {
        return domain(format!("Nielsen S_{{n,p}}(z) needs real z ≤ 1, got {z}"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // t = u²: dt/t = 2 du/u, ln t = 2 ln u.
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let l1 = (-z * u * u).ln_1p();
        if !l1.is_finite() {
            return 0.0;
        }
        2.0 * (2.0 * u.ln()).powi(n as i32 - 1) * l1.powi(p as i32) / u
    };
    let spec = QuadSpec { abs_tol: 1e-14, rel_tol: 1e-13, max_subdivisions: 4000, ..QuadSpec::default() };
    let r = integrate_breaks(integrand, &[0.0, 0.5, 0.9, 1.0], &spec)?;
    let sign = if (n + p - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * r.value / (factorial(n - 1) * factorial(p)))
}

/// `₂F₁(α, β; γ; z)` for real `z < 1`: the power series, after the Pfaff
/// map `z → z/(z-1)` when `z < 0`. Meant for small parameter values.
pub fn hyp2f1(alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<f64> {
    if !(z < 1.0) || !z.is_finite() {
        return domain(format!("₂F₁ needs real z < 1, got {z}"));
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-beta) * hyp2f1_series(gamma - alpha, beta, gamma, w)?);
    }
    hyp2f1_series(alpha, beta, gamma, z)
}

fn hyp2f1_series(alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..100_000 {
        let jf = j as f64;
        term *= (alpha + jf) * (beta + jf) / ((gamma + jf) * (jf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    no_convergence(format!("₂F₁ series at z = {z} did not converge"))
}
