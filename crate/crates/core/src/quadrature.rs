//! Globally adaptive Gauss–Kronrod (7/15) integration, principal values and
//! Hilbert transforms on a half-line or a finite interval.
//!
//! Integrands may be real or complex; both implement [`QuadValue`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{domain, no_convergence, Error, Result};

/// Tolerances and limits for one integration call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Split point for half-line integrals; `[tail_cutoff, ∞)` is mapped onto `(0, 1]`.
    pub tail_cutoff: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000, tail_cutoff: 1e4 }
    }
}

impl QuadSpec {
    pub fn with_tol(tol: f64) -> Self {
        QuadSpec { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.tail_cutoff > 0.0) {
            return Err(crate::Error::Config(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T = f64> {
    pub value: T,
    pub err_estimate: f64,
    pub subdivisions_used: usize,
}

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

// Kronrod 15-point abscissae; odd indices are the embedded Gauss 7-point nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, lo: f64, hi: f64) -> (T, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k = k + pair * WGK[i];
        if i % 2 == 1 {
            g = g + pair * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

struct Piece<T> {
    lo: f64,
    hi: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration over `[breaks[0], breaks[last]]`, starting from the
/// given subintervals. Breakpoints must be increasing.
///
/// Pieces too narrow to bisect in floating point are frozen; if only frozen
/// pieces remain above tolerance the result is returned with its (honest)
/// error estimate rather than as a failure.
pub fn integrate_breaks<T: QuadValue, F: Fn(f64) -> T>(f: F, breaks: &[f64], spec: &QuadSpec) -> Result<QuadResult<T>> {
    spec.validate()?;
    if breaks.len() < 2 {
        return domain("integration needs at least two breakpoints");
    }
    if breaks.windows(2).any(|w| !(w[1] >= w[0])) || breaks.iter().any(|x| !x.is_finite()) {
        return domain(format!("integration breakpoints not increasing and finite: {breaks:?}"));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen_value = T::zero();
    let mut frozen_err = 0.0;
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Piece { lo: w[0], hi: w[1], value: v, err: e });
    }
    let mut used = heap.len();
    loop {
        if !total.magnitude().is_finite() || !total_err.is_finite() {
            return no_convergence(format!(
                "non-finite integrand on [{}, {}]",
                breaks[0],
                breaks[breaks.len() - 1]
            ));
        }
        let tol = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            // Everything left is frozen: roundoff-limited.
            break;
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            frozen_value = frozen_value + worst.value;
            frozen_err += worst.err;
            continue;
        }
        if used >= spec.max_subdivisions {
            heap.push(worst);
            return no_convergence(format!(
                "adaptive quadrature on [{}, {}] hit {} subdivisions with error estimate {:.3e}",
                breaks[0],
                breaks[breaks.len() - 1],
                spec.max_subdivisions,
                total_err
            ));
        }
        let (v1, e1) = gk15(&f, worst.lo, mid);
        let (v2, e2) = gk15(&f, mid, worst.hi);
        used += 1;
        heap.push(Piece { lo: worst.lo, hi: mid, value: v1, err: e1 });
        heap.push(Piece { lo: mid, hi: worst.hi, value: v2, err: e2 });
        // Re-sum from scratch so rounding does not accumulate.
        total = frozen_value;
        total_err = frozen_err;
        for p in heap.iter() {
            total = total + p.value;
            total_err += p.err;
        }
    }
    let mut value = frozen_value;
    let mut err = frozen_err;
    for p in heap.iter() {
        value = value + p.value;
        err += p.err;
    }
    Ok(QuadResult { value, err_estimate: err, subdivisions_used: used })
}

/// `∫_lo^hi f`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadSpec) -> Result<QuadResult> {
    integrate_breaks(f, &[lo, hi], spec)
}

/// `∫_lo^hi f` for a complex integrand.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, spec: &QuadSpec) -> Result<QuadResult<Complex64>> {
    integrate_breaks(f, &[lo, hi], spec)
}

/// `∫_lo^∞ f`. The range `[max(lo, tail_cutoff), ∞)` is mapped by `p = c/u`.
/// Interior breakpoints in `(lo, tail_cutoff)` may be supplied to resolve
/// known features.
pub fn integrate_halfline<T: QuadValue, F: Fn(f64) -> T>(f: F, lo: f64, extra_breaks: &[f64], spec: &QuadSpec) -> Result<QuadResult<T>> {
    let c = spec.tail_cutoff.max(lo);
    let mut breaks = vec![lo];
    breaks.extend(extra_breaks.iter().copied().filter(|&x| x > lo && x < c));
    breaks.sort_by(f64::total_cmp);
    breaks.push(c);
    let head = if c > lo { integrate_breaks(&f, &breaks, spec)? } else {
        QuadResult { value: T::zero(), err_estimate: 0.0, subdivisions_used: 0 }
    };
    let tail = integrate_breaks(
        |u: f64| if u <= 0.0 { T::zero() } else { f(c / u) * (c / (u * u)) },
        &[0.0, 1.0],
        spec,
    )?;
    Ok(QuadResult {
        value: head.value + tail.value,
        err_estimate: head.err_estimate + tail.err_estimate,
        subdivisions_used: head.subdivisions_used + tail.subdivisions_used,
    })
}

/// `PV ∫_lo^hi f(x)/(x - pole) dx`.
///
/// A symmetric window of half-width `h = min(pole-lo, hi-pole)` is folded into
/// `∫_0^h (f(pole+s) - f(pole-s))/s ds`, which is regular and exact on
/// constants. The rest of the range carries no singularity.
pub fn principal_value<T: QuadValue, F: Fn(f64) -> T>(f: F, lo: f64, hi: f64, pole: f64, spec: &QuadSpec) -> Result<QuadResult<T>> {
    if !(lo < pole && pole < hi) {
        return domain(format!("principal value pole {pole} not strictly inside ({lo}, {hi})"));
    }
    let h = (pole - lo).min(hi - pole);
    let sym = integrate_breaks(
        |s: f64| if s <= 0.0 { T::zero() } else { (f(pole + s) - f(pole - s)) * (1.0 / s) },
        &[0.0, h],
        spec,
    )?;
    let rest = if pole - lo > h * (1.0 + 1e-15) {
        integrate_breaks(|x: f64| f(x) * (1.0 / (x - pole)), &[lo, pole - h], spec)?
    } else if hi - pole > h * (1.0 + 1e-15) {
        integrate_breaks(|x: f64| f(x) * (1.0 / (x - pole)), &[pole + h, hi], spec)?
    } else {
        QuadResult { value: T::zero(), err_estimate: 0.0, subdivisions_used: 0 }
    };
    Ok(QuadResult {
        value: sym.value + rest.value,
        err_estimate: sym.err_estimate + rest.err_estimate,
        subdivisions_used: sym.subdivisions_used + rest.subdivisions_used,
    })
}

/// Heuristic for `f(p) ↛ 0`: compares `|f|` at two far-out points.
fn tail_diverges<F: Fn(f64) -> f64>(f: &F, scale: f64) -> bool {
    let p1 = scale * 1e6;
    let p2 = scale * 1e12;
    let (f1, f2) = (f(p1).abs(), f(p2).abs());
    !f2.is_finite() || (f2 > 1e-12 && f2 >= 0.5 * f1)
}

/// One-sided Hilbert transform `H_a[f] = (1/π) PV ∫_0^∞ f(p)/(p-a) dp`.
///
/// For `a = 0` the integral `∫ f(p)/p` is taken as ordinary, which requires
/// `f(0) = 0`.
pub fn hilbert_halfline<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadSpec) -> Result<f64> {
    hilbert_halfline_breaks(f, a, &[], spec)
}

/// [`hilbert_halfline`] with extra breakpoints for the regular part.
pub fn hilbert_halfline_breaks<F: Fn(f64) -> f64>(f: F, a: f64, extra: &[f64], spec: &QuadSpec) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return domain(format!("Hilbert transform point must be finite and ≥ 0, got {a}"));
    }
    if tail_diverges(&f, spec.tail_cutoff.max(a).max(1.0)) {
        return domain("Hilbert transform integrand does not decay at infinity");
    }
    let regular_from = 2.0 * a;
    let near = if a > 0.0 { principal_value(&f, 0.0, regular_from, a, spec)?.value } else { 0.0 };
    let far = integrate_halfline(
        |p: f64| {
            let d = p - a;
            if d == 0.0 { 0.0 } else { f(p) / d }
        },
        regular_from,
        extra,
        spec,
    )?;
    Ok((near + far.value) / PI)
}

/// Finite Hilbert transform `(1/π) ∫_lo^hi f(p)/(p-b) dp`, principal value
/// when `lo < b < hi` and ordinary when `b` lies outside.
pub fn hilbert_finite<T: QuadValue, F: Fn(f64) -> T>(f: F, b: f64, lo: f64, hi: f64, spec: &QuadSpec) -> Result<T> {
    let v = if lo < b && b < hi {
        principal_value(f, lo, hi, b, spec)?.value
    } else if b < lo || b > hi {
        integrate_breaks(|p: f64| f(p) * (1.0 / (p - b)), &[lo, hi], spec)?.value
    } else {
        return domain(format!("Hilbert transform point {b} on the interval endpoint"));
    };
    Ok(v * (1.0 / PI))
}

/// `p ↦ e^{H_p[τ]} sin τ(p)` on `[0, Λ²]` with the finite transform.
fn tricomi_density<'a, F: Fn(f64) -> f64 + 'a>(tau: &'a F, sign: f64, lambda2: f64, spec: &'a QuadSpec) -> impl Fn(f64) -> f64 + 'a {
    move |p: f64| {
        let t = tau(p);
        if t == 0.0 || p <= 0.0 || p >= lambda2 {
            return 0.0;
        }
        match hilbert_finite(tau, p, 0.0, lambda2, spec) {
            Ok(h) => (sign * h).exp() * t.sin(),
            Err(_) => f64::NAN,
        }
    }
}

/// Both sides of `H_b[e^{H[τ]} sin τ] = e^{H_b[τ]} cos τ(b) − 1` for `0 < b < Λ²`,
/// all transforms taken over `[0, Λ²]`.
pub fn tricomi_sides<F: Fn(f64) -> f64>(tau: F, lambda2: f64, b: f64, spec: &QuadSpec) -> Result<(f64, f64)> {
    if !(0.0 < b && b < lambda2) {
        return domain(format!("Tricomi identity needs 0 < b < Λ², got b = {b}, Λ² = {lambda2}"));
    }
    let inner = spec_inner(spec);
    let g = tricomi_density(&tau, 1.0, lambda2, &inner);
    let lhs = hilbert_finite(&g, b, 0.0, lambda2, spec)?;
    let rhs = hilbert_finite(&tau, b, 0.0, lambda2, &inner)?.exp() * tau(b).cos() - 1.0;
    Ok((finite_or_fail(lhs)?, finite_or_fail(rhs)?))
}

/// Residual `lhs − rhs` of [`tricomi_sides`].
pub fn tricomi_check<F: Fn(f64) -> f64>(tau: F, lambda2: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    tricomi_sides(tau, lambda2, b, spec).map(|(l, r)| l - r)
}

/// Residual of `(1/π)∫ e^{H_p[τ]} sin τ(p)/(p−b) dp = exp((1/π)∫ τ(p)/(p−b) dp) − 1`
/// for `b` outside `[0, Λ²]`.
pub fn tricomi_outside_check<F: Fn(f64) -> f64>(tau: F, lambda2: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    if (0.0..=lambda2).contains(&b) {
        return domain(format!("outside Tricomi identity needs b ∉ [0, Λ²], got {b}"));
    }
    let inner = spec_inner(spec);
    let g = tricomi_density(&tau, 1.0, lambda2, &inner);
    let lhs = hilbert_finite(&g, b, 0.0, lambda2, spec)?;
    let rhs = hilbert_finite(&tau, b, 0.0, lambda2, spec)?.exp() - 1.0;
    finite_or_fail(lhs - rhs)
}

/// `(∫ e^{+H_p[τ]} sin τ, ∫ e^{-H_p[τ]} sin τ, ∫ τ)` over `[0, Λ²]`; the three agree.
pub fn tau_identity_sides<F: Fn(f64) -> f64>(tau: F, lambda2: f64, spec: &QuadSpec) -> Result<(f64, f64, f64)> {
    let inner = spec_inner(spec);
    let rhs = integrate(&tau, 0.0, lambda2, spec)?.value;
    let plus = integrate(tricomi_density(&tau, 1.0, lambda2, &inner), 0.0, lambda2, spec)?.value;
    let minus = integrate(tricomi_density(&tau, -1.0, lambda2, &inner), 0.0, lambda2, spec)?.value;
    Ok((finite_or_fail(plus)?, finite_or_fail(minus)?, rhs))
}

/// Residuals of `∫_0^{Λ²} e^{±H_p[τ]} sin τ(p) dp = ∫_0^{Λ²} τ(p) dp`, for both signs.
pub fn tau_identity_check<F: Fn(f64) -> f64>(tau: F, lambda2: f64, spec: &QuadSpec) -> Result<(f64, f64)> {
    tau_identity_sides(tau, lambda2, spec).map(|(p, m, r)| (p - r, m - r))
}

fn spec_inner(spec: &QuadSpec) -> QuadSpec {
    QuadSpec { abs_tol: spec.abs_tol * 0.1, rel_tol: spec.rel_tol * 0.1, ..*spec }
}

fn finite_or_fail(x: f64) -> Result<f64> {
    if x.is_finite() { Ok(x) } else { no_convergence("nested transform produced a non-finite value") }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Config("Gauss–Legendre rule needs n ≥ 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}
