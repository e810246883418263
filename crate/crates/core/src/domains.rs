//! Branch boundaries and holomorphy domains.
//!
//! * `Ω_K`: right of the critical curve `𝒞 = {-e^{1-α cot α + iα}}`, i.e.
//!   `|λ| < r(π - |arg λ|)` with `r(α) = e^{1-α cot α}`.
//! * `Ω_N`: `λ` is singular for some `a ≥ 0` iff `λ log(½-it) = a + ½ + it`
//!   has a real solution `t`. We solve `Im g(t) = 0` for
//!   `g(t) = λ log(½-it) - ½ - it` and test `Re g ≥ 0` at every root; this
//!   is the envelope test without sampling the envelope.
//! * `Ω_λ`: `Re z > -½` and right of `𝒩_λ(t) = -½ + it + λ log(½+it)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, no_convergence, Result};

/// Width of the indeterminate band around every boundary.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub param: f64,
    pub point: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveId {
    CCritical,
    CA,
    Envelope,
    BPlus,
    BMinus,
    BZero,
    NLambdaCurve,
}

impl CurveId {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveId::CCritical => "critical",
            CurveId::CA => "cochleoid",
            CurveId::Envelope => "envelope",
            CurveId::BPlus => "B_plus",
            CurveId::BMinus => "B_minus",
            CurveId::BZero => "B_zero",
            CurveId::NLambdaCurve => "Nlambda",
        }
    }
}

/// Membership verdict. `boundary` flags points within [`BOUNDARY_BAND`] of
/// the boundary, where `inside` is not to be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub inside: bool,
    pub boundary: bool,
    pub distance_estimate: f64,
    pub nearest_curve: CurveId,
}

impl RegionVerdict {
    /// Inside and not within the indeterminate band.
    pub fn strictly_inside(&self) -> bool {
        self.inside && !self.boundary
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x }
}

/// `α cot α`, with the limit 1 at 0.
fn alpha_cot(alpha: f64) -> f64 {
    if alpha.abs() < 1e-8 { 1.0 - alpha * alpha / 3.0 } else { alpha / alpha.tan() }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 { domain(format!("need at least 2 samples, got {n}")) } else { Ok(()) }
}

/// `θ ↦ -(1+a) (sin θ/θ) e^{iθ}`; its part `|θ| < π` is `𝒞_a`.
pub fn cochleoid(a: f64, theta: (f64, f64), n: usize) -> Result<Vec<CurveSample>> {
    check_samples(n)?;
    if !(a >= 0.0) {
        return domain(format!("cochleoid needs a ≥ 0, got {a}"));
    }
    Ok(linspace(theta.0, theta.1, n).map(|t| CurveSample { param: t, point: cochleoid_point(a, t) }).collect())
}

pub fn cochleoid_point(a: f64, theta: f64) -> Complex64 {
    -(1.0 + a) * sinc(theta) * Complex64::from_polar(1.0, theta)
}

/// `r(α) = e^{1 - α cot α}`, the modulus of the critical curve at angle `α + π`.
pub fn critical_radius(alpha: f64) -> f64 {
    if alpha.abs() >= PI {
        return f64::INFINITY;
    }
    (1.0 - alpha_cot(alpha)).exp()
}

pub fn critical_point(alpha: f64) -> Complex64 {
    -critical_radius(alpha) * Complex64::from_polar(1.0, alpha)
}

/// Samples of `𝒞 = {-e^{1-α cot α + iα} : -π < α < π}`.
pub fn critical_curve(alpha: (f64, f64), n: usize) -> Result<Vec<CurveSample>> {
    check_samples(n)?;
    if !(alpha.0 > -PI && alpha.1 < PI) {
        return domain(format!("critical curve needs -π < α < π, got [{}, {}]", alpha.0, alpha.1));
    }
    Ok(linspace(alpha.0, alpha.1, n).map(|a| CurveSample { param: a, point: critical_point(a) }).collect())
}

/// Angle `α ∈ (-π, π]` with `λ = -|λ| e^{iα}`.
fn reflected_angle(lambda: Complex64) -> f64 {
    (-lambda).arg()
}

pub fn omega_k_verdict(lambda: Complex64) -> RegionVerdict {
    let r = critical_radius(reflected_angle(lambda));
    let m = lambda.norm();
    let gap = r - m;
    RegionVerdict {
        inside: gap > 0.0,
        boundary: r.is_finite() && gap.abs() <= BOUNDARY_BAND * r.max(1.0),
        distance_estimate: if r.is_finite() { gap.abs() } else { f64::INFINITY },
        nearest_curve: CurveId::CCritical,
    }
}

/// `λ ∈ Ω_K`, off the indeterminate band.
pub fn in_omega_k(lambda: Complex64) -> bool {
    omega_k_verdict(lambda).strictly_inside()
}

/// Whether `λ = -(1+a)(sin α/α) e^{iα}` lies on the discontinuous part of `𝒞_a`.
pub fn on_solid_cut(a: f64, alpha: f64) -> bool {
    (1.0 + a) * sinc(alpha) >= critical_radius(alpha)
}

/// Branch of Lambert W used by `K(a,λ)` for complex `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchIndex {
    pub k: i32,
    /// `λ` lies within the band of a dashed threshold `|λ| = λ_k(φ)`, where
    /// both neighbouring branches give the same limit.
    pub on_threshold: bool,
}

/// `Y = X - π` with `X = |φ| + (1+a) sin|φ| / |λ|`, `λ = |λ| e^{iφ}`.
///
/// Written as `(1+a) sin δ/|λ| - δ` with `δ = π - |φ|`, so the sign is exact
/// next to the negative real axis. On that axis it is the limit from
/// `Im λ > 0`.
pub fn branch_phase(a: f64, lambda: Complex64) -> f64 {
    let m = lambda.norm();
    let delta = lambda.im.abs().atan2(-lambda.re);
    if delta == 0.0 {
        // Negative real axis: Y → δ ((1+a)/|λ| - 1), report the sign at unit scale.
        return ((1.0 + a) / m - 1.0) * f64::MIN_POSITIVE;
    }
    (1.0 + a) * delta.sin() / m - delta
}

/// Branch `k` in `λ W_k(e^{(1+a)/λ}/λ) - 1 - a` for `λ = |λ| e^{iφ}`.
///
/// The thresholds `λ_k(φ)` are `X = (2k+1)π`, i.e. `Y = 2kπ`; `φ > 0`
/// selects `W_{-⌊Y/2π⌋-1}`, `φ < 0` selects `W_{⌈Y/2π⌉}`. On the negative
/// axis `|λ| < 1+a` selects `W_{-1}`.
pub fn branch_index_lambda(a: f64, lambda: Complex64) -> Result<BranchIndex> {
    if !(a >= 0.0 && a.is_finite()) {
        return domain(format!("branch index needs finite a ≥ 0, got {a}"));
    }
    let m = lambda.norm();
    if !m.is_finite() {
        return domain("branch index needs finite λ");
    }
    if lambda.im == 0.0 {
        if lambda.re >= 0.0 {
            return Ok(BranchIndex { k: 0, on_threshold: false });
        }
        let gap = m - (1.0 + a);
        let k = if gap < 0.0 { -1 } else { 0 };
        return Ok(BranchIndex { k, on_threshold: gap.abs() <= BOUNDARY_BAND * (1.0 + a) });
    }
    let y = branch_phase(a, lambda) / (2.0 * PI);
    let k = if lambda.im > 0.0 { -(y.floor() as i32) - 1 } else { y.ceil() as i32 };
    // dY/d|λ| = -(1+a) sin δ/|λ|², so a band in |λ| maps to this band in Y.
    let delta = lambda.im.abs().atan2(-lambda.re);
    let band = BOUNDARY_BAND * (1.0 + a) * delta.sin() / (m * m) / (2.0 * PI);
    let on_threshold = (y - y.round()).abs() <= band.max(f64::EPSILON);
    Ok(BranchIndex { k, on_threshold })
}

/// `z ∈ B^±_λ = {±λπi - t : t ≥ 1 + λ - λ log λ}`, `λ > 0`.
pub fn in_b_pm(z: Complex64, lambda: f64) -> bool {
    let start = 1.0 + lambda - lambda * lambda.ln();
    let on_line = (z.im.abs() - lambda * PI).abs() <= BOUNDARY_BAND * (1.0 + lambda * PI);
    on_line && -z.re >= start - BOUNDARY_BAND
}

/// `z ∈ B^0_λ = (-∞, -1 + |λ| - |λ| log|λ|)`, `-1 < λ < 0`.
pub fn in_b_zero(z: Complex64, lambda: f64) -> bool {
    let l = lambda.abs();
    let end = -1.0 + l - l * l.ln();
    z.im.abs() <= BOUNDARY_BAND && z.re < end + BOUNDARY_BAND
}

/// Real roots of a continuous `f` on `[lo, hi]` by sampling and bisection.
fn real_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let xs: Vec<f64> = linspace(lo, hi, samples).collect();
    let mut prev = (xs[0], f(xs[0]));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for &x in &xs[1..] {
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && prev.1.signum() != fx.signum() {
            let (mut a, mut b, mut fa) = (prev.0, x, prev.1);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || b - a <= 4.0 * f64::EPSILON * m.abs().max(1e-300) {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (x, fx);
    }
    roots
}

/// `λ ∈ Ω_N`, the common holomorphy domain of `N_λ(a,b)` and `G_λ(a,b)`.
pub fn in_omega_n(lambda: Complex64) -> RegionVerdict {
    let half = Complex64::new(0.5, 0.0);
    let g = |t: f64| lambda * (half - Complex64::new(0.0, t)).ln() - half - Complex64::new(0.0, t);
    if lambda.norm() == 0.0 {
        return RegionVerdict { inside: true, boundary: false, distance_estimate: crate::INV_LOG4, nearest_curve: CurveId::Envelope };
    }
    // |Im λ log(½-it)| ≤ |λ| (log √(¼+t²) + π/2) bounds every root.
    let m = lambda.norm();
    let mut span = 4.0 + 2.0 * m;
    while span < m * ((0.25 + span * span).sqrt().ln().max(0.0) + PI) {
        span *= 2.0;
    }
    let samples = 4000 + (400.0 * span.sqrt()) as usize;
    let roots = real_roots(|t| g(t).im, -span, span, samples);
    let mut best: Option<(f64, f64)> = None;
    for t in roots {
        let re = g(t).re;
        let scale = (half - Complex64::new(0.0, t)).ln().norm();
        if best.is_none_or(|(r, _)| re > r) {
            best = Some((re, scale));
        }
    }
    let (re, scale) = best.unwrap_or((f64::NEG_INFINITY, 1.0));
    RegionVerdict {
        inside: re < 0.0,
        boundary: re.abs() <= BOUNDARY_BAND,
        distance_estimate: re.abs() / scale,
        nearest_curve: CurveId::Envelope,
    }
}

/// `P(t) = (½+it)/log(½-it)` and `m(t) = 1/log(½-it)` with their derivatives.
fn envelope_parts(t: f64) -> (Complex64, Complex64, Complex64, Complex64) {
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let w = half - i * t;
    let l = w.ln();
    let dl = -i / w;
    let m = l.inv();
    let dm = -dl / (l * l);
    let p = (half + i * t) / l;
    let dp = (i * l - (half + i * t) * dl) / (l * l);
    (p, dp, m, dm)
}

/// Point of the envelope `ℰ(t)` given the switch parameter `t_ℰ`.
pub fn envelope_point(t: f64, t_e: f64) -> Complex64 {
    let (p, dp, m, dm) = envelope_parts(t);
    if t.abs() <= t_e {
        return p;
    }
    p + m * (m.conj() * dp - m * dp.conj()) / (m * dm.conj() - m.conj() * dm)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.signum() != fhi.signum()) {
        return no_convergence(format!("root not bracketed on [{lo}, {hi}]"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Switch point `t_ℰ` of the envelope and the matching angle `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub t_e: f64,
    pub psi: f64,
    pub samples: Vec<CurveSample>,
}

/// `t_ℰ` from `Im(conj(m) P') = 0`, `ψ` from its trigonometric form, and `n`
/// samples of `ℰ(t)` for `t ∈ [-t_max, t_max]`.
pub fn envelope(n: usize, t_max: f64) -> Result<Envelope> {
    check_samples(n)?;
    let t_e = bisect(
        |t| {
            let (_, dp, m, _) = envelope_parts(t);
            (m.conj() * dp).im
        },
        0.2,
        2.0,
    )?;
    let psi = bisect(
        |s| {
            let lc = (2.0 * s.cos()).ln();
            s * s + lc * lc - s * (2.0 * s).sin() - (2.0 * s).cos() * lc
        },
        0.5,
        1.2,
    )?;
    let samples = linspace(-t_max, t_max, n).map(|t| CurveSample { param: t, point: envelope_point(t, t_e) }).collect();
    Ok(Envelope { t_e, psi, samples })
}

/// `𝒩_λ(t) = -½ + it + λ log(½+it)`.
pub fn n_lambda_curve_point(t: f64, lambda: f64) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    let it = Complex64::new(0.0, t);
    -half + it + lambda * (half + it).ln()
}

pub fn n_lambda_curve(lambda: f64, t: (f64, f64), n: usize) -> Result<Vec<CurveSample>> {
    check_samples(n)?;
    Ok(linspace(t.0, t.1, n).map(|s| CurveSample { param: s, point: n_lambda_curve_point(s, lambda) }).collect())
}

/// `z ∈ Ω_λ`: `Re z > -½` and right of `𝒩_λ`.
pub fn in_omega_lambda_ab(z: Complex64, lambda: f64) -> RegionVerdict {
    let half_gap = z.re + 0.5;
    // Im 𝒩_λ(t) = t + λ atan(2t) is within |λ|π/2 of t.
    let span = z.im.abs() + lambda.abs() * PI + 2.0;
    let roots = real_roots(|t| n_lambda_curve_point(t, lambda).im - z.im, -span, span, 4000);
    let curve_x = roots.iter().map(|&t| n_lambda_curve_point(t, lambda).re).fold(f64::NEG_INFINITY, f64::max);
    let curve_gap = z.re - curve_x;
    let (gap, nearest) = if half_gap <= curve_gap {
        (half_gap, CurveId::NLambdaCurve)
    } else {
        (curve_gap, CurveId::NLambdaCurve)
    };
    RegionVerdict {
        inside: gap > 0.0,
        boundary: gap.abs() <= BOUNDARY_BAND,
        distance_estimate: gap.abs(),
        nearest_curve: nearest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn curve_spot_values() {
        assert!(cochleoid_point(0.0, PI).norm() < 1e-15);
        assert!((cochleoid_point(0.0, 1e-12) - c(-1.0, 0.0)).norm() < 1e-11);
        assert!((cochleoid_point(1.0, PI / 2.0) - c(0.0, -4.0 / PI)).norm() < 1e-14);
        assert!((critical_point(0.0) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((critical_point(PI / 2.0) - c(0.0, -std::f64::consts::E)).norm() < 1e-14);
    }

    #[test]
    fn envelope_switch_point() {
        let e = envelope(64, 5.0).unwrap();
        assert!((e.t_e - 0.582).abs() < 1e-3, "t_E = {}", e.t_e);
        assert!((e.psi - 0.861).abs() < 1e-3, "ψ = {}", e.psi);
        assert!((e.t_e - 0.5 * e.psi.tan()).abs() < 1e-9);
        // The two pieces meet at t_E.
        let inner = envelope_point(e.t_e, e.t_e);
        let outer = envelope_point(e.t_e * (1.0 + 1e-9), e.t_e);
        assert!((inner - outer).norm() < 1e-6);
    }

    #[test]
    fn omega_n_real_axis() {
        assert!(in_omega_n(c(1.0, 0.0)).strictly_inside());
        assert!(in_omega_n(c(-0.72, 0.0)).strictly_inside());
        assert!(!in_omega_n(c(-0.73, 0.0)).inside);
        assert!(!in_omega_n(c(-1.0, 0.0)).inside);
        assert!(in_omega_n(c(-crate::INV_LOG4, 0.0)).boundary);
        assert!(in_omega_n(c(50.0, 0.0)).strictly_inside());
    }

    #[test]
    fn omega_n_contains_disk_of_convergence() {
        for k in 0..64 {
            let th = 2.0 * PI * k as f64 / 64.0;
            assert!(in_omega_n(Complex64::from_polar(0.99 * crate::INV_LOG4, th)).strictly_inside(), "θ = {th}");
        }
    }

    #[test]
    fn omega_n_inside_omega_k() {
        for k in 0..200 {
            let th = -PI + 2.0 * PI * (k as f64 + 0.5) / 200.0;
            for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let l = Complex64::from_polar(r, th);
                if in_omega_n(l).strictly_inside() {
                    assert!(in_omega_k(l), "λ = {l}");
                }
            }
        }
    }

    #[test]
    fn omega_k_basics() {
        assert!(in_omega_k(c(-0.99, 0.0)));
        assert!(!in_omega_k(c(-1.01, 0.0)));
        assert!(in_omega_k(c(1e6, 0.0)));
        assert!(in_omega_k(c(0.3, 0.4)));
        assert!(!in_omega_k(c(0.0, 3.0)));
    }

    #[test]
    fn branch_index_real_axis() {
        assert_eq!(branch_index_lambda(1.0, c(0.7, 0.0)).unwrap().k, 0);
        assert_eq!(branch_index_lambda(1.0, c(-0.7, 0.0)).unwrap().k, -1);
        assert_eq!(branch_index_lambda(0.0, c(-1.5, 0.0)).unwrap().k, 0);
        assert!(branch_index_lambda(1.0, c(-2.0, 0.0)).unwrap().on_threshold);
    }

    #[test]
    fn omega_lambda_examples() {
        assert!(in_omega_lambda_ab(c(1.0, 0.0), 0.5).strictly_inside());
        assert!(!in_omega_lambda_ab(c(-0.6, 0.0), 0.5).inside);
        assert!(!in_omega_lambda_ab(c(-0.6, 0.0), -0.3).inside);
        // 𝒩_0.5 crosses Im z = 5 at Re ≈ 0.23.
        assert!(!in_omega_lambda_ab(c(-0.4, 5.0), 0.5).inside);
        assert!(in_omega_lambda_ab(c(0.5, 5.0), 0.5).inside);
    }

    #[test]
    fn cut_sets() {
        assert!(in_b_pm(c(-10.0, 0.5 * PI), 0.5));
        assert!(!in_b_pm(c(-1.0, 0.5 * PI), 0.5));
        assert!(in_b_zero(c(-5.0, 0.0), -0.5));
        assert!(!in_b_zero(c(-0.1, 0.0), -0.5));
    }
}
