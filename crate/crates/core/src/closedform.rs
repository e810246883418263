//! The closed-form solution.
//!
//! Notation used throughout:
//!
//! * `u(a) = a + K(a,λ)`, the root of `u + λ ln(1+u) = a` (`u > 0` for `a > 0`);
//! * `v(a) = 1 + u(a) = λ W(e^{(1+a)/λ}/λ)`, with `W = W_0` for `λ > 0` and
//!   `W = W_{-1}` for `-1 < λ < 0`;
//! * `K(a,λ) = -λ ln(1 + u(a))`, `L(a,λ) = ln(u(a)/a)`, `I_λ(a) = K - λL`;
//! * `τ_a(p) = arg(D + iλπ)` with `D = a + v(p) - λ ln(v(p) - 1)`, which is
//!   `arctan(λπ/D)` on `[0,π]` for `λ > 0` and on `[-π,0]` for `λ < 0`;
//! * `G(a,b) = (1+a+b) e^{N(a,b)} / ((a + v(b)) (b + v(a)))`.
//!
//! `K` is never formed from `e^{(1+a)/λ}`: the root of the functional
//! equation is bracketed and polished by Newton, which is exact to rounding
//! for every `λ` including `λ → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domains;
use crate::error::{domain, no_convergence, Result};
use crate::quadrature::{hilbert_halfline_breaks, integrate_halfline, QuadSpec};
use crate::special::{lambert_w_real, lambert_w_side, Side};
use crate::INV_LOG4;

/// `(a, b, λ)`; `λ` is complex, with zero imaginary part for real coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub a: f64,
    pub b: f64,
    pub lambda: Complex64,
}

impl EvalPoint {
    pub fn real(a: f64, b: f64, lambda: f64) -> Self {
        EvalPoint { a, b, lambda: Complex64::new(lambda, 0.0) }
    }
}

/// `G` together with the `N` that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    pub g: Complex64,
    pub n_value: Complex64,
    pub err_estimate: f64,
}

fn check_real(name: &str, x: f64) -> Result<()> {
    if x.is_finite() { Ok(()) } else { domain(format!("{name} must be finite, got {x}")) }
}

/// `u = a + K(a,λ)`: the root of `u + λ ln(1+u) = a` on the branch that is
/// real-analytic at `λ = 0` (`1 + u > |λ|` when `λ < 0`).
pub fn shifted_root(a: f64, lambda: f64) -> Result<f64> {
    check_real("a", a)?;
    check_real("λ", lambda)?;
    if a < 0.0 {
        return domain(format!("K(a,λ) needs a ≥ 0, got a = {a}"));
    }
    if lambda <= -1.0 {
        return domain(format!("K(a,λ) needs λ > -1, got λ = {lambda}"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return Ok(a);
    }
    // λ > 0: the root lies in [0, a]; λ < 0: in [a, 2a+2] where the map is increasing.
    let (mut lo, mut hi) = if lambda > 0.0 { (0.0, a) } else { (a, 2.0 * a + 2.0) };
    let mut u = (a - lambda * a.ln_1p()).clamp(lo, hi);
    for _ in 0..200 {
        let f = (u - a) + lambda * u.ln_1p();
        if f == 0.0 {
            return Ok(u);
        }
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let df = 1.0 + lambda / (1.0 + u);
        let mut next = u - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * next.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        u = next;
    }
    no_convergence(format!("root of u + λ ln(1+u) = a not found for a = {a}, λ = {lambda}"))
}

/// `K(a,λ) = λ W(e^{(1+a)/λ}/λ) - 1 - a`, solving `K = -λ ln(1+a+K)`.
pub fn lambert_k(a: f64, lambda: f64) -> Result<f64> {
    let u = shifted_root(a, lambda)?;
    Ok(-lambda * u.ln_1p())
}

/// `v(a) = 1 + a + K(a,λ) = λ W(e^{(1+a)/λ}/λ)`.
pub fn lambert_factor(a: f64, lambda: f64) -> Result<f64> {
    Ok(1.0 + shifted_root(a, lambda)?)
}

/// `λ W_k(e^{(1+a)/λ}/λ)` for a real branch `k ∈ {0, -1}` chosen explicitly.
///
/// For `-1 < λ < 0` both branches are real: `k = -1` is [`lambert_factor`],
/// `k = 0` is the small root `v ∈ (0, |λ|)` of `v + λ ln v = 1 + a`.
pub fn lambert_factor_branch(a: f64, lambda: f64, k: i32) -> Result<f64> {
    match (k, lambda > 0.0) {
        (0, true) | (-1, false) => lambert_factor(a, lambda),
        (0, false) => {
            if lambda == 0.0 {
                return domain("λ W_0(e^{(1+a)/λ}/λ) is singular at λ = 0");
            }
            let x = ((1.0 + a) / lambda).exp() / lambda;
            Ok(lambda * lambert_w_real(0, x.max(crate::special::BRANCH_POINT))?)
        }
        _ => domain(format!("branch W_{k} is not real for λ = {lambda}")),
    }
}

/// `L(a,λ) = ln((a + K)/a)`, with the `a → 0` limit `-ln(1+λ)`.
pub fn lambert_l(a: f64, lambda: f64) -> Result<f64> {
    if a == 0.0 {
        check_real("λ", lambda)?;
        if lambda <= -1.0 {
            return domain(format!("L(a,λ) needs λ > -1, got λ = {lambda}"));
        }
        return Ok(-lambda.ln_1p());
    }
    let k = lambert_k(a, lambda)?;
    Ok((k / a).ln_1p())
}

/// `I_λ(a) = K(a,λ) - λ L(a,λ)`.
pub fn i_lambda(a: f64, lambda: f64) -> Result<f64> {
    Ok(lambert_k(a, lambda)? - lambda * lambert_l(a, lambda)?)
}

/// Angle function `τ_a(p)`; continuous in `p`, `τ_a(0) = 0` for `λ > 0` and
/// `-π` for `λ < 0`.
pub fn angle_tau(a: f64, p: f64, lambda: f64) -> Result<f64> {
    let u = shifted_root(p, lambda)?;
    Ok(angle_from_shift(a, u, lambda))
}

fn angle_from_shift(a: f64, u: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    // ln u → -∞ as p → 0, so D → +∞·sign(λ).
    let d = a + 1.0 + u - lambda * u.ln();
    (lambda * PI).atan2(d)
}

/// Denominator `a + v(b) - λ ln(v(b) - 1)` appearing in `τ` and in the
/// Hilbert-transform representation of `G`.
pub fn angle_denominator(a: f64, b: f64, lambda: f64) -> Result<f64> {
    let u = shifted_root(b, lambda)?;
    Ok(a + 1.0 + u - lambda * u.ln())
}

/// `λ ∈ Ω_K`, the region right of the critical curve.
fn check_omega_k(lambda: Complex64) -> Result<()> {
    if domains::in_omega_k(lambda) {
        Ok(())
    } else {
        domain(format!("λ = {lambda} lies outside Ω_K (left of the critical curve)"))
    }
}

/// `ln(1 + x)` for complex `x`, accurate for small `|x|`.
pub fn complex_ln_1p(x: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * x.re + x.norm_sqr()).ln_1p();
    Complex64::new(re, x.im.atan2(1.0 + x.re))
}

/// Complex `K(z, λ)`.
///
/// * complex `λ`, real `z = a ≥ 0`: branch from [`domains::branch_index_lambda`];
/// * real `λ > 0`, complex `z`: `W_k` with `(2k-1)πλ < Im z ≤ (2k+1)πλ`, `z ∉ B^±_λ`;
/// * real `-1 < λ < 0`, complex `z`: `W_{-k}` per the strip rule, `z ∉ B^0_λ`.
///
/// In every case the selected `w = W_k(e^L/λ...)` is the solution of
/// `w + Log w = L` with the unwrapped `L = (1+z)/λ - Log λ`, which is how the
/// result is polished.
pub fn lambert_k_complex(z: Complex64, lambda: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 && (lambda.im != 0.0 || lambda.re < 0.0) {
        check_omega_k(lambda)?;
    }
    lambert_k_assigned(z, lambda)
}

/// [`lambert_k_complex`] without the `Ω_K` check: the branch assignment
/// alone, also on the far side of the critical curve.
pub fn lambert_k_assigned(z: Complex64, lambda: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite() && lambda.re.is_finite() && lambda.im.is_finite()) {
        return domain("K(z,λ) needs finite arguments");
    }
    if lambda.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.im == 0.0 && lambda.im == 0.0 && z.re >= 0.0 && lambda.re > -1.0 {
        return Ok(Complex64::new(lambert_k(z.re, lambda.re)?, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut ell = (one + z) / lambda - lambda.ln();
    let (branch, arg) = if lambda.im != 0.0 || lambda.re < 0.0 && z.im == 0.0 {
        if z.im != 0.0 {
            return domain("K(z,λ) with both z and λ non-real is not supported");
        }
        if z.re < 0.0 {
            return domain(format!("K(a,λ) for complex λ needs real a ≥ 0, got {}", z.re));
        }
        let a = z.re;
        let bi = domains::branch_index_lambda(a, lambda)?;
        // Im L = ∓(π + Y) for Im λ ≷ 0, with Y = X - π free of cancellation.
        let y = domains::branch_phase(a, lambda);
        let upper = lambda.im > 0.0 || (lambda.im == 0.0 && lambda.re < 0.0);
        let sign = if upper { -1.0 } else { 1.0 };
        ell.im = sign * (PI + y);
        let m = ell.re.exp();
        (bi.k, Complex64::new(-m * y.cos(), -sign * m * y.sin()))
    } else if lambda.re > 0.0 {
        let l = lambda.re;
        if domains::in_b_pm(z, l) {
            return domain(format!("z = {z} lies on the cut B^±_λ for λ = {l}"));
        }
        (((z.im / (PI * l) - 1.0) / 2.0).ceil() as i32, ell.exp())
    } else {
        let l = lambda.re;
        if l <= -1.0 {
            return domain(format!("K(z,λ) needs λ > -1, got {l}"));
        }
        if domains::in_b_zero(z, l) {
            return domain(format!("z = {z} lies on the cut B^0_λ for λ = {l}"));
        }
        let s = z.im / (2.0 * PI * l.abs());
        let k = if z.im >= 0.0 { s.floor() as i32 + 1 } else { s.floor() as i32 };
        (-k, ell.exp())
    };
    let mut w = if ell.re < 600.0 && arg.norm().is_finite() {
        let side = if arg.im < 0.0 { Side::Lower } else { Side::Upper };
        lambert_w_side(branch, arg, side)?
    } else {
        ell - ell.ln()
    };
    // Polish on w + Log w = L; steps that do not reduce the residual are rejected.
    for _ in 0..60 {
        let f = w + w.ln() - ell;
        let next = w - f * w / (w + one);
        let fn_ = next + next.ln() - ell;
        if !(fn_.norm() < f.norm()) {
            break;
        }
        w = next;
        if fn_.norm() <= 4.0 * f64::EPSILON * ell.norm().max(1.0) {
            break;
        }
    }
    let k = lambda * w - one - z;
    let resid = (k + lambda * (one + z + k).ln()).norm();
    if !(resid <= 1e-10 * (1.0 + k.norm())) {
        return no_convergence(format!(
            "K({z}, {lambda}) on W_{branch} misses the functional equation by {resid:.3e}"
        ));
    }
    Ok(k)
}

/// `λ W(e^{(1+z)/λ}/λ) = 1 + z + K(z,λ)` for complex arguments.
pub fn lambert_factor_complex(z: Complex64, lambda: Complex64) -> Result<Complex64> {
    Ok(Complex64::new(1.0, 0.0) + z + lambert_k_complex(z, lambda)?)
}

fn n_integrand(a: Complex64, b: Complex64, lambda: Complex64, t: f64) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    let it = Complex64::new(0.0, t);
    let i = Complex64::new(0.0, 1.0);
    let log_am = (half - it).ln();
    let log_bp = (half + it).ln();
    let da = a + half + it;
    let db = b + half - it;
    let ln_a = complex_ln_1p(-lambda * log_am / da);
    let bval = Complex64::new(1.0, 0.0) - lambda * log_bp / db;
    let dbdt = -lambda * i * (db / (half + it) + log_bp) / (db * db);
    ln_a * dbdt / bval
}

fn n_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![0.25, 0.5, 1.0, 2.0, 8.0, a + 0.5, b + 0.5, 4.0 * (a + 0.5), 4.0 * (b + 0.5)];
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn n_spec(spec: &QuadSpec) -> QuadSpec {
    QuadSpec { abs_tol: spec.abs_tol.min(1e-13), rel_tol: spec.rel_tol.min(1e-11), max_subdivisions: spec.max_subdivisions.max(4000), ..*spec }
}

/// Domain of `G` and `N` for real coupling: `(-1/log 4, ∞)`.
pub fn check_real_coupling(lambda: f64) -> Result<()> {
    check_real("λ", lambda)?;
    if lambda <= -INV_LOG4 {
        return domain(format!("λ = {lambda} lies outside Ω_N: real couplings need λ > -1/log 4 ≈ -0.72135"));
    }
    Ok(())
}

/// `N_λ(a,b)` for real arguments, with its quadrature error estimate.
///
/// The integrand `f` satisfies `f(-t) = -conj f(t)`, so
/// `N = (1/π) ∫_0^∞ Im f(t) dt`.
pub fn n_lambda_with(a: f64, b: f64, lambda: f64, spec: &QuadSpec) -> Result<(f64, f64)> {
    check_real_coupling(lambda)?;
    if a < 0.0 || b < 0.0 {
        return domain(format!("N_λ(a,b) needs a, b ≥ 0, got ({a}, {b})"));
    }
    if lambda == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (ac, bc, lc) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(lambda, 0.0));
    let r = integrate_halfline(|t: f64| n_integrand(ac, bc, lc, t).im, 0.0, &n_breaks(a, b), &n_spec(spec))?;
    Ok((r.value / PI, r.err_estimate / PI))
}

/// `N_λ(a,b)`.
pub fn n_lambda(a: f64, b: f64, lambda: f64) -> Result<f64> {
    n_lambda_with(a, b, lambda, &QuadSpec::default()).map(|x| x.0)
}

/// `N_λ(a,b)` for complex `λ ∈ Ω_N` and complex `a, b`.
pub fn n_lambda_complex(a: Complex64, b: Complex64, lambda: Complex64, spec: &QuadSpec) -> Result<(Complex64, f64)> {
    if lambda.im == 0.0 {
        check_real_coupling(lambda.re)?;
    } else {
        let verdict = domains::in_omega_n(lambda);
        if !verdict.inside {
            return domain(format!("λ = {lambda} lies outside Ω_N"));
        }
    }
    if lambda.re.is_finite() && lambda.im.is_finite() && (a.im != 0.0 || b.im != 0.0) && lambda.im == 0.0 {
        for z in [a, b] {
            if !domains::in_omega_lambda_ab(z, lambda.re).inside {
                return domain(format!("argument {z} lies outside Ω_λ for λ = {}", lambda.re));
            }
        }
    }
    if lambda.norm() == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let r = integrate_halfline(
        |t: f64| n_integrand(a, b, lambda, t) + n_integrand(a, b, lambda, -t),
        0.0,
        &n_breaks(a.norm(), b.norm()),
        &n_spec(spec),
    )?;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    Ok((r.value / two_pi_i, r.err_estimate / (2.0 * PI)))
}

/// `G_λ(a,b)` from the Lambert-W closed form.
pub fn two_point(point: EvalPoint) -> Result<GValue> {
    two_point_with(point, &QuadSpec::default())
}

pub fn two_point_with(point: EvalPoint, spec: &QuadSpec) -> Result<GValue> {
    let EvalPoint { a, b, lambda } = point;
    check_real("a", a)?;
    check_real("b", b)?;
    if a < 0.0 || b < 0.0 {
        return domain(format!("G(a,b) needs a, b ≥ 0, got ({a}, {b})"));
    }
    if lambda.im == 0.0 {
        let l = lambda.re;
        check_real_coupling(l)?;
        let (n, err) = n_lambda_with(a, b, l, spec)?;
        let g = assemble_g(a, b, l, n)?;
        return Ok(GValue { g: Complex64::new(g, 0.0), n_value: Complex64::new(n, 0.0), err_estimate: err * g.abs() });
    }
    let (ac, bc) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
    let (n, err) = n_lambda_complex(ac, bc, lambda, spec)?;
    let va = lambert_factor_complex(ac, lambda)?;
    let vb = lambert_factor_complex(bc, lambda)?;
    let g = (1.0 + a + b) * n.exp() / ((ac + vb) * (bc + va));
    Ok(GValue { g, n_value: n, err_estimate: err * g.norm() })
}

/// `G = (1+a+b) e^N / ((a + v(b))(b + v(a)))` for real `λ`, given `N`.
pub fn assemble_g(a: f64, b: f64, lambda: f64, n: f64) -> Result<f64> {
    let va = lambert_factor(a, lambda)?;
    let vb = lambert_factor(b, lambda)?;
    Ok((1.0 + a + b) * n.exp() / ((a + vb) * (b + va)))
}

/// Real `G_λ(a,b)`.
pub fn g_real(a: f64, b: f64, lambda: f64) -> Result<f64> {
    two_point(EvalPoint::real(a, b, lambda)).map(|v| v.g.re)
}

/// `G` via the angle function:
/// `exp(H_b[τ_a]) / sqrt((λπ)² + (a + v(b) - λ ln(v(b) - 1))²)`, `λ > 0`, `b > 0`.
///
/// At `b = 0` both the transform and the denominator diverge; that point is
/// rejected rather than taken as a limit.
pub fn two_point_hilbert(a: f64, b: f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("Hilbert representation of G needs λ > 0, got {lambda}"));
    }
    if !(a >= 0.0 && b > 0.0) {
        return domain(format!("Hilbert representation of G needs a ≥ 0, b > 0, got ({a}, {b})"));
    }
    let tau = |p: f64| angle_tau(a, p, lambda).unwrap_or(f64::NAN);
    let breaks = [0.1 * b, 0.5, 1.0 + a, 10.0 * (1.0 + a + b), 100.0 * (1.0 + a + b)];
    let h = hilbert_halfline_breaks(tau, b, &breaks, spec)?;
    let d = angle_denominator(a, b, lambda)?;
    Ok(h.exp() / ((lambda * PI).powi(2) + d * d).sqrt())
}

/// `arctan_{[0,π]}(λπ/(1 + a + v - λ ln v))`, the kernel of the double-integral
/// representation; `0` at `v = 0`.
pub fn log_angle(a: f64, v: f64, lambda: f64) -> f64 {
    if v <= 0.0 {
        return if lambda >= 0.0 { 0.0 } else { -PI };
    }
    (lambda * PI).atan2(1.0 + a + v - lambda * v.ln())
}

/// `G` via the manifestly symmetric double integral
/// `exp(-∫∫ θ_a(v) θ_b(u) / (π²(1+u+v)²)) / (v(a) + v(b) - 1)`, `λ > 0` only.
pub fn two_point_alt(a: f64, b: f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("the double-integral representation of G holds only for λ > 0, got {lambda}"));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return domain(format!("G needs a, b ≥ 0, got ({a}, {b})"));
    }
    let inner_spec = QuadSpec { abs_tol: spec.abs_tol * 0.1, rel_tol: spec.rel_tol * 0.1, ..*spec };
    let breaks = [0.01, 0.1, 1.0, 1.0 + a, 1.0 + b, 10.0 * (1.0 + a + b)];
    let inner = |u: f64| -> f64 {
        integrate_halfline(|v: f64| log_angle(a, v, lambda) / (1.0 + u + v).powi(2), 0.0, &breaks, &inner_spec)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let outer = integrate_halfline(|u: f64| log_angle(b, u, lambda) * inner(u), 0.0, &breaks, spec)?;
    if !outer.value.is_finite() {
        return no_convergence("double integral for G did not converge");
    }
    let j = outer.value / (PI * PI);
    Ok((-j).exp() / (lambert_factor(a, lambda)? + lambert_factor(b, lambda)? - 1.0))
}

/// Strong-coupling sum `W_0(z) = Σ_{n≥1} (-n)^{n-1} z^n / n!`, `|z| < 1/e`.
pub fn lambert_w0_series(z: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for n in 1..=terms {
        let nf = n as f64;
        // (-n)^{n-1} z^n / n! in log form to avoid overflow.
        let log_mag = (nf - 1.0) * nf.ln() + nf * z.abs().ln() - ln_factorial(n);
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 } * if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * log_mag.exp();
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Closed-form `G` on a tensor grid, for one real coupling.
///
/// All `N(x_i, y_j)` share one trapezoidal rule in `t = sinh(s)`, so the grid
/// costs one matrix product instead of one adaptive integral per entry. The
/// step shrinks as `λ` approaches `-1/log 4`, where a zero of the integrand's
/// logarithm approaches the real `t` axis.
#[derive(Debug, Clone)]
pub struct GridSampler {
    pub lambda: f64,
    pub step: f64,
}

impl GridSampler {
    pub fn new(lambda: f64) -> Result<Self> {
        check_real_coupling(lambda)?;
        let step = if lambda < 0.0 { (0.3 * (lambda + INV_LOG4)).min(0.02) } else { 0.02 };
        Ok(GridSampler { lambda, step })
    }

    fn nodes(&self, max_arg: f64) -> Vec<(f64, f64)> {
        let s_max = (1e6f64.max(1e4 * (1.0 + max_arg))).asinh() + 10.0;
        let m = (s_max / self.step).ceil() as usize;
        (0..=m)
            .map(|k| {
                let s = k as f64 * self.step;
                let w = if k == 0 { 0.5 } else { 1.0 } * self.step * s.cosh();
                (s.sinh(), w)
            })
            .collect()
    }

    /// `N(x_i, y_j)`.
    pub fn n_matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        if xs.iter().chain(ys).any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return domain("grid arguments must be finite and ≥ 0");
        }
        let lambda = self.lambda;
        if lambda == 0.0 {
            return Ok(vec![vec![0.0; ys.len()]; xs.len()]);
        }
        let max_arg = xs.iter().chain(ys).fold(0.0f64, |m, &x| m.max(x));
        let nodes = self.nodes(max_arg);
        let lc = Complex64::new(lambda, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let i = Complex64::new(0.0, 1.0);
        // Per-node logs, shared by every row and column.
        let logs: Vec<(Complex64, Complex64)> = nodes
            .iter()
            .map(|&(t, _)| {
                let it = Complex64::new(0.0, t);
                ((half - it).ln(), (half + it).ln())
            })
            .collect();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = xs
            .par_iter()
            .map(|&x| {
                nodes
                    .iter()
                    .zip(&logs)
                    .map(|(&(t, w), &(lm, _))| {
                        let v = complex_ln_1p(-lc * lm / Complex64::new(x + 0.5, t)) * w;
                        (v.re, v.im)
                    })
                    .unzip()
            })
            .collect();
        let cols: Vec<(Vec<f64>, Vec<f64>)> = ys
            .par_iter()
            .map(|&y| {
                nodes
                    .iter()
                    .zip(&logs)
                    .map(|(&(t, _), &(_, lp))| {
                        let it = Complex64::new(0.0, t);
                        let db = Complex64::new(y + 0.5, -t);
                        let bval = Complex64::new(1.0, 0.0) - lc * lp / db;
                        let v = -lc * i * (db / (half + it) + lp) / (db * db) / bval;
                        (v.re, v.im)
                    })
                    .unzip()
            })
            .collect();
        let out: Vec<Vec<f64>> = rows
            .par_iter()
            .map(|(ar, ai)| {
                cols.iter()
                    .map(|(br, bi)| {
                        let mut s = 0.0;
                        for k in 0..ar.len() {
                            s += ar[k] * bi[k] + ai[k] * br[k];
                        }
                        s / PI
                    })
                    .collect()
            })
            .collect();
        if out.iter().flatten().any(|x| !x.is_finite()) {
            return no_convergence(format!("grid evaluation of N produced non-finite values at λ = {lambda}"));
        }
        Ok(out)
    }

    /// `G(x_i, y_j)`.
    pub fn g_matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.n_matrix(xs, ys)?;
        let vx = xs.iter().map(|&x| lambert_factor(x, self.lambda)).collect::<Result<Vec<_>>>()?;
        let vy = ys.iter().map(|&y| lambert_factor(y, self.lambda)).collect::<Result<Vec<_>>>()?;
        Ok(xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                ys.iter()
                    .enumerate()
                    .map(|(j, &y)| (1.0 + x + y) * n[i][j].exp() / ((x + vy[j]) * (y + vx[i])))
                    .collect()
            })
            .collect())
    }
}

/// Adaptive-quadrature view of [`two_point_with`] exposing only the real part.
pub fn g_with_spec(a: f64, b: f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    two_point_with(EvalPoint::real(a, b, lambda), spec).map(|v| v.g.re)
}

/// `∫_0^∞ (τ_a(p) - λπ/(1+p)) dp / π`, the integral whose closed form is `I_λ(a)`.
pub fn i_lambda_by_quadrature(a: f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain("the counterterm integral for I_λ is stated for λ > 0");
    }
    let r = integrate_halfline(
        |p: f64| angle_tau(a, p, lambda).unwrap_or(f64::NAN) - lambda * PI / (1.0 + p),
        0.0,
        &[1e-6, 1e-3, 0.1, 1.0, 10.0],
        spec,
    )?;
    Ok(r.value / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen from an independent 30-digit evaluation (Lambert W and the N integral).
    const G_REFERENCE: [(f64, f64, f64, f64, f64); 7] = [
        (0.0, 0.0, 0.5, 0.951_701_868_823_414_12, -0.049_503_456_237_159_449),
        (1.0, 2.0, 0.5, 0.299_483_765_228_261_72, -0.013_735_524_386_195_761),
        (0.0, 0.0, 1.0, 0.876_964_707_507_170_34, -0.131_288_529_714_827_63),
        (2.0, 3.0, 0.5, 0.199_837_430_688_076_01, -0.006_455_311_492_990_148_6),
        (1.0, 1.0, -0.5, 0.244_569_532_606_819_11, -0.031_544_792_331_562_653),
        (0.5, 3.0, 2.0, 0.327_042_161_048_828_53, -0.156_270_904_151_212_79),
        (0.0, 0.0, -0.7, 0.137_382_903_679_173_24, -1.984_983_334_306_989_4),
    ];

    #[test]
    fn k_reference_values() {
        assert!((lambert_k(1.0, 0.5).unwrap() + 0.273_149_588_836_611_06).abs() < 1e-15);
        assert!((lambert_k(1.0, -0.5).unwrap() - 0.447_542_160_637_615_62).abs() < 1e-15);
        assert!((lambert_k(100.0, 0.01).unwrap() + 0.046_146_635_150_541_204).abs() < 1e-15);
        assert_eq!(lambert_k(3.0, 0.0).unwrap(), 0.0);
        assert_eq!(lambert_k(0.0, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn k_tiny_coupling_does_not_overflow() {
        let k = lambert_k(5.0, 1e-5).unwrap();
        assert!((k + 1e-5 * 6f64.ln()).abs() < 1e-9);
        assert!((k + 1e-5 * (6.0 + k).ln()).abs() < 1e-18);
    }

    #[test]
    fn n_and_g_reference_values() {
        for &(a, b, l, g, n) in &G_REFERENCE {
            let v = two_point(EvalPoint::real(a, b, l)).unwrap();
            assert!((v.n_value.re - n).abs() < 1e-10, "N({a},{b},{l}) = {} vs {n}", v.n_value.re);
            assert!((v.g.re - g).abs() < 1e-10, "G({a},{b},{l}) = {} vs {g}", v.g.re);
        }
    }

    #[test]
    fn g_at_zero_coupling() {
        let v = g_real(1.5, 2.0, 0.0).unwrap();
        assert!((v - 1.0 / 4.5).abs() < 1e-15);
    }

    #[test]
    fn real_coupling_bound() {
        assert!(g_real(0.0, 0.0, -0.73).is_err());
        assert!(g_real(0.0, 0.0, -INV_LOG4).is_err());
    }

    #[test]
    fn grid_sampler_matches_adaptive() {
        for l in [0.5, 2.0, -0.5, -0.7] {
            let s = GridSampler::new(l).unwrap();
            let xs = [0.0, 0.3, 2.0, 50.0];
            let m = s.g_matrix(&xs, &xs).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in xs.iter().enumerate() {
                    let g = g_real(x, y, l).unwrap();
                    assert!((m[i][j] - g).abs() < 1e-10 * g.max(1e-3), "λ={l} ({x},{y}): {} vs {g}", m[i][j]);
                }
            }
        }
    }

    #[test]
    fn complex_coupling_conjugation() {
        let l = Complex64::new(0.3, 0.4);
        let p = two_point(EvalPoint { a: 1.0, b: 0.5, lambda: l }).unwrap();
        let q = two_point(EvalPoint { a: 1.0, b: 0.5, lambda: l.conj() }).unwrap();
        assert!((p.g - q.g.conj()).norm() < 1e-10);
        let k = lambert_k_complex(Complex64::new(1.0, 0.0), l).unwrap();
        let arg = Complex64::new(2.0, 0.0) + k;
        assert!((k + l * arg.ln()).norm() < 1e-12);
    }
}
