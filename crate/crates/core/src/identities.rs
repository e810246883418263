//! Numeric checks of the standalone Lambert-W identities.
//!
//! Every check evaluates the integral side by adaptive quadrature of the
//! printed integrand and the closed side from [`crate::special`] alone, so the
//! two share nothing beyond the coupling and the arguments. Throughout,
//! `V_k = λ W_k(e^{(1+a)/λ}/λ)`; for `λ > 0` only `k = 0` is real, for
//! `-1 < λ < 0` both `k = 0` and `k = -1` are.
//!
//! `arctan_{[0,π]}(λπ/D)` and `arctan_{[-π,0]}(λπ/D)` are both `atan2(λπ, D)`:
//! the sign of `λ` picks the half plane and the angle stays continuous when
//! `D` changes sign.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::closedform::{angle_tau, complex_ln_1p};
use crate::error::{domain, Error, Result};
use crate::quadrature::{
    hilbert_halfline_breaks, integrate, integrate_halfline, tau_identity_sides, tricomi_sides, QuadSpec,
};
use crate::special::{lambert_w0_exp, lambert_w_real, lambert_wm1_negexp};

/// Breakpoints resolving the `1/ln u` behaviour at the origin and the bend near `u ~ 1`.
const BREAKS: [f64; 9] = [1e-12, 1e-8, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IdentityId {
    /// `∫_0^λ dt/t · 1/(1 + W_0(e^{1/t + a/λ}/t)) = ln a - ln(V_0 - 1)`.
    #[serde(rename = "L_LambertInt")]
    LLambertInt,
    /// `∫_1^∞ du/π arctan(λπ/(a+u-λ ln(u-1)))/(u+z) = ln((z+λ ln(1+z)-a)/(1+z-V_0))`.
    #[serde(rename = "L_Lambert_int")]
    LLambertIntZ,
    /// `∫_1^∞ du/π (arctan(λπ/(a+u-λ ln(u-1))) - λπ/u) = V_0 - 1 - a`.
    #[serde(rename = "K_Lambert_int")]
    KLambertInt,
    /// `∫_0^∞ du/π arctan(λπ/(1+a+u-λ ln u))/(1+u+z) = ln((z+λ ln(1+z)-a)/(1+z-V_0))`.
    J1,
    /// `∫_0^∞ du/π (arctan(λπ/(1+a+u-λ ln u)) - λπ/(1+u)) = V_0 - 1 - a`.
    J2,
    /// `H_b[arctan(λπ/(1+a+•-λ ln •))] = ln(√((1+a+b-λ ln b)² + λ²π²)/(b+V_0))`.
    HTArctanLog,
    /// `(1/2πi)∮ dw/(w-b) ln(1 - λ ln(-w)/(1+a+w)) = ln((1+a+b)/(b+V_0))` around `[0, ∞)`.
    #[serde(rename = "logW0_path")]
    LogW0Path,
    /// [`IdentityId::J1`] for `-1 < λ < 0`: both real branches enter.
    #[serde(rename = "Jneg_1")]
    Jneg1,
    /// [`IdentityId::J2`] for `-1 < λ < 0`: both real branches enter.
    #[serde(rename = "Jneg_2")]
    Jneg2,
    /// The negative-coupling counterpart of the `I_λ` integral.
    CorollaryNeg,
    /// `H_b[e^{H[τ]} sin τ] = e^{H_b[τ]} cos τ(b) - 1` on `[0, Λ²]` with `τ = τ_a`.
    Tricomi18,
    /// `∫ e^{±H[τ]} sin τ = ∫ τ` on `[0, Λ²]` with `τ = τ_a`.
    TauIdentity,
}

impl IdentityId {
    pub const ALL: [IdentityId; 12] = [
        IdentityId::LLambertInt,
        IdentityId::LLambertIntZ,
        IdentityId::KLambertInt,
        IdentityId::J1,
        IdentityId::J2,
        IdentityId::HTArctanLog,
        IdentityId::LogW0Path,
        IdentityId::Jneg1,
        IdentityId::Jneg2,
        IdentityId::CorollaryNeg,
        IdentityId::Tricomi18,
        IdentityId::TauIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::LLambertInt => "L_LambertInt",
            IdentityId::LLambertIntZ => "L_Lambert_int",
            IdentityId::KLambertInt => "K_Lambert_int",
            IdentityId::J1 => "J1",
            IdentityId::J2 => "J2",
            IdentityId::HTArctanLog => "HTArctanLog",
            IdentityId::LogW0Path => "logW0_path",
            IdentityId::Jneg1 => "Jneg_1",
            IdentityId::Jneg2 => "Jneg_2",
            IdentityId::CorollaryNeg => "CorollaryNeg",
            IdentityId::Tricomi18 => "Tricomi18",
            IdentityId::TauIdentity => "TauIdentity",
        }
    }

    /// A 3×3 sample of `(a, λ)` inside the stated domain, with the remaining
    /// parameters fixed.
    pub fn sample_params(self) -> Vec<Params> {
        let positive = [0.25, 1.0, 2.5];
        let negative = [-0.2, -0.5, -0.9];
        let (a_values, lambdas): ([f64; 3], [f64; 3]) = match self {
            IdentityId::LLambertInt | IdentityId::LLambertIntZ | IdentityId::KLambertInt => ([0.5, 1.0, 3.0], positive),
            IdentityId::Jneg1 | IdentityId::Jneg2 => ([0.0, 1.0, 3.0], negative),
            IdentityId::CorollaryNeg => ([0.5, 1.0, 3.0], negative),
            _ => ([0.0, 1.0, 3.0], positive),
        };
        let mut out = Vec::new();
        for &a in &a_values {
            for &lambda in &lambdas {
                let p = Params::new(a, lambda);
                out.push(match self {
                    IdentityId::LLambertIntZ | IdentityId::J1 | IdentityId::Jneg1 => p.with_z(Complex64::new(0.7, 0.0)),
                    IdentityId::HTArctanLog | IdentityId::LogW0Path => p.with_b(0.7),
                    IdentityId::Tricomi18 => p.with_cutoff(50.0).with_b(2.0),
                    IdentityId::TauIdentity => p.with_cutoff(50.0),
                    _ => p,
                });
            }
        }
        out
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown identity {s:?}")))
    }
}

/// Inputs of a check. Unused fields stay `None` and are omitted from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Params {
    pub a: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Complex64>,
    /// `Λ²` for the finite-interval transforms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl Params {
    pub fn new(a: f64, lambda: f64) -> Self {
        Params { a, lambda, ..Default::default() }
    }

    pub fn with_b(self, b: f64) -> Self {
        Params { b: Some(b), ..self }
    }

    pub fn with_z(self, z: Complex64) -> Self {
        Params { z: Some(z), ..self }
    }

    pub fn with_cutoff(self, cutoff: f64) -> Self {
        Params { cutoff: Some(cutoff), ..self }
    }

    fn need_b(&self) -> Result<f64> {
        self.b.ok_or_else(|| Error::Config("this identity needs the parameter b".into()))
    }

    fn need_z(&self) -> Result<Complex64> {
        self.z.ok_or_else(|| Error::Config("this identity needs the parameter z".into()))
    }

    fn need_cutoff(&self) -> Result<f64> {
        self.cutoff.ok_or_else(|| Error::Config("this identity needs the parameter cutoff".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity_id: IdentityId,
    pub inputs: Params,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs|`.
    pub residual: f64,
}

impl IdentityCheck {
    fn new(identity_id: IdentityId, inputs: Params, lhs: Complex64, rhs: Complex64) -> Result<Self> {
        let residual = (lhs - rhs).norm();
        if !residual.is_finite() {
            return Err(Error::Convergence(format!("{identity_id}: non-finite sides {lhs} and {rhs}")));
        }
        Ok(IdentityCheck { identity_id, inputs, lhs, rhs, residual })
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.residual <= tolerance
    }

    pub fn to_json(&self, tolerance: f64) -> serde_json::Value {
        serde_json::json!({
            "identity_id": self.identity_id,
            "params": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": tolerance,
            "pass": self.passes(tolerance),
        })
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `V_0 = λ W_0(e^{(1+a)/λ}/λ)` for `λ ≥ 0`, with the limit `1 + a` at `λ = 0`.
fn v0_positive(a: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(1.0 + a);
    }
    Ok(lambda * lambert_w0_exp((1.0 + a) / lambda - lambda.ln())?)
}

/// `(V_0, V_{-1})` for `-1 < λ < 0`, where `e^{(1+a)/λ}/λ ∈ [-1/e, 0)` and
/// both branches are real. Both solve `V + λ ln V = 1 + a`; `V_0 < |λ| < V_{-1}`.
fn v_negative(a: f64, lambda: f64) -> Result<(f64, f64)> {
    let y = (1.0 + a) / lambda - (-lambda).ln();
    let x = -y.exp();
    Ok((lambda * lambert_w_real(0, x)?, lambda * lambert_wm1_negexp(y)?))
}

fn check_positive(a: f64, lambda: f64, strict_a: bool) -> Result<()> {
    let a_ok = if strict_a { a > 0.0 } else { a >= 0.0 };
    if !(a_ok && a.is_finite() && lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("identity stated for a {} 0 and λ > 0, got a = {a}, λ = {lambda}", if strict_a { ">" } else { "≥" }));
    }
    Ok(())
}

fn check_negative(a: f64, lambda: f64, strict_a: bool) -> Result<()> {
    let a_ok = if strict_a { a > 0.0 } else { a >= 0.0 };
    if !(a_ok && a.is_finite() && lambda > -1.0 && lambda < 0.0) {
        return domain(format!("identity stated for -1 < λ < 0, got a = {a}, λ = {lambda}"));
    }
    Ok(())
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re <= -1.0) {
        return domain(format!("z = {z} lies on the cut (-∞, -1]"));
    }
    Ok(())
}

/// `atan2(λπ, 1 + a + u - λ ln u)`.
fn angle(a: f64, u: f64, lambda: f64) -> f64 {
    (lambda * PI).atan2(1.0 + a + u - lambda * u.ln())
}

/// `∫_0^∞ du/π angle(u)/(1+u+z)`; absolutely convergent, no counterterm.
fn angle_against_pole(a: f64, lambda: f64, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    let r = integrate_halfline(|u: f64| real(angle(a, u, lambda) / PI) / (1.0 + u + z), 0.0, &BREAKS, spec)?;
    Ok(r.value)
}

/// `∫_0^∞ du/π (angle(u) - λπ/(1+u))`; the counterterm `λπ/(1+u)` removes the `1/u` tail.
fn angle_subtracted(a: f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    let r = integrate_halfline(|u: f64| (angle(a, u, lambda) - lambda * PI / (1.0 + u)) / PI, 0.0, &BREAKS, spec)?;
    Ok(r.value)
}

/// `ln((z + λ ln(1+z) - a)/(1 + z - V))` shared by J1 and its shifted form.
fn j1_closed(a: f64, lambda: f64, z: Complex64, v: f64) -> Complex64 {
    ((z + lambda * complex_ln_1p(z) - a) / (1.0 + z - v)).ln()
}

/// Evaluates both sides of `id` at `params`.
pub fn check(id: IdentityId, params: &Params, spec: &QuadSpec) -> Result<IdentityCheck> {
    let (a, lambda) = (params.a, params.lambda);
    let p = *params;
    match id {
        IdentityId::LLambertInt => {
            check_positive(a, lambda, true)?;
            // 1/(1+W) ~ t as t → 0, so the integrand tends to 1.
            let r = integrate(
                |t: f64| {
                    if t <= 0.0 {
                        return 1.0;
                    }
                    lambert_w0_exp(1.0 / t + a / lambda - t.ln()).map_or(f64::NAN, |w| 1.0 / (t * (1.0 + w)))
                },
                0.0,
                lambda,
                spec,
            )?;
            let rhs = a.ln() - (v0_positive(a, lambda)? - 1.0).ln();
            IdentityCheck::new(id, p, real(r.value), real(rhs))
        }
        IdentityId::LLambertIntZ => {
            check_positive(a, lambda, true)?;
            let z = p.need_z()?;
            check_z(z)?;
            // u = 1 + s turns the integrand into the J1 one with a shifted by -1.
            let lhs = integrate_halfline(
                |s: f64| real((lambda * PI).atan2(a + 1.0 + s - lambda * s.ln()) / PI) / (1.0 + s + z),
                0.0,
                &BREAKS,
                spec,
            )?
            .value;
            IdentityCheck::new(id, p, lhs, j1_closed(a, lambda, z, v0_positive(a, lambda)?))
        }
        IdentityId::KLambertInt => {
            check_positive(a, lambda, true)?;
            // Counterterm λπ/u on [1, ∞).
            let lhs = integrate_halfline(
                |s: f64| ((lambda * PI).atan2(a + 1.0 + s - lambda * s.ln()) - lambda * PI / (1.0 + s)) / PI,
                0.0,
                &BREAKS,
                spec,
            )?
            .value;
            IdentityCheck::new(id, p, real(lhs), real(v0_positive(a, lambda)? - 1.0 - a))
        }
        IdentityId::J1 => {
            if !(a >= 0.0 && lambda >= 0.0 && lambda.is_finite()) {
                return domain(format!("J1 is stated for a, λ ≥ 0, got a = {a}, λ = {lambda}"));
            }
            let z = p.need_z()?;
            check_z(z)?;
            let lhs = angle_against_pole(a, lambda, z, spec)?;
            let rhs = if lambda == 0.0 { real(0.0) } else { j1_closed(a, lambda, z, v0_positive(a, lambda)?) };
            IdentityCheck::new(id, p, lhs, rhs)
        }
        IdentityId::J2 => {
            if !(a >= 0.0 && lambda >= 0.0 && lambda.is_finite()) {
                return domain(format!("J2 is stated for a, λ ≥ 0, got a = {a}, λ = {lambda}"));
            }
            let lhs = angle_subtracted(a, lambda, spec)?;
            IdentityCheck::new(id, p, real(lhs), real(v0_positive(a, lambda)? - 1.0 - a))
        }
        IdentityId::HTArctanLog => {
            check_positive(a, lambda, false)?;
            let b = p.need_b()?;
            if !(b > 0.0 && b.is_finite()) {
                return domain(format!("the transform point needs b > 0, got {b}"));
            }
            let lhs = hilbert_halfline_breaks(|u: f64| angle(a, u, lambda), b, &BREAKS, spec)?;
            let d = 1.0 + a + b - lambda * b.ln();
            let rhs = (d.hypot(lambda * PI) / (b + v0_positive(a, lambda)?)).ln();
            IdentityCheck::new(id, p, real(lhs), real(rhs))
        }
        IdentityId::LogW0Path => {
            check_positive(a, lambda, false)?;
            let b = p.need_b()?;
            if !(b >= 0.0 && b.is_finite()) {
                return domain(format!("logW0_path needs b ≥ 0, got {b}"));
            }
            // Every singularity of the integrand sits at Re w ≤ -1, so the
            // contour around [0, ∞) opens onto w = -1/2 + it, t from -∞ to ∞.
            let half = real(0.5);
            let f = |t: f64| {
                let it = Complex64::new(0.0, t);
                let log_a = complex_ln_1p(-lambda * (half - it).ln() / (a + half + it));
                log_a / (it - 0.5 - b) / (2.0 * PI)
            };
            let lhs = integrate_halfline(|t: f64| f(t) + f(-t), 0.0, &[0.5, 2.0, 10.0, 100.0], spec)?.value;
            let rhs = ((1.0 + a + b) / (b + v0_positive(a, lambda)?)).ln();
            IdentityCheck::new(id, p, lhs, real(rhs))
        }
        IdentityId::Jneg1 => {
            check_negative(a, lambda, false)?;
            let z = p.need_z()?;
            check_z(z)?;
            let lhs = angle_against_pole(a, lambda, z, spec)?;
            let (v0, vm1) = v_negative(a, lambda)?;
            let rhs = ((z + lambda * complex_ln_1p(z) - a) * (1.0 + z) / ((1.0 + z - v0) * (1.0 + z - vm1))).ln();
            IdentityCheck::new(id, p, lhs, rhs)
        }
        IdentityId::Jneg2 => {
            check_negative(a, lambda, false)?;
            let lhs = angle_subtracted(a, lambda, spec)?;
            let (v0, vm1) = v_negative(a, lambda)?;
            IdentityCheck::new(id, p, real(lhs), real(-1.0 - a + v0 + vm1))
        }
        IdentityId::CorollaryNeg => {
            check_negative(a, lambda, true)?;
            let lhs = integrate_halfline(
                |q: f64| {
                    let Ok((_, vm1)) = v_negative(q, lambda) else { return f64::NAN };
                    // V_{-1}(q) ≥ 1 with equality at q = 0, where the log drives the angle to -π.
                    let d = a + vm1 - lambda * (vm1 - 1.0).ln();
                    ((lambda * PI).atan2(d) - lambda * PI / (1.0 + q)) / PI
                },
                0.0,
                &BREAKS,
                spec,
            )?
            .value;
            let (v0, vm1) = v_negative(a, lambda)?;
            let rhs = -1.0 - a + lambda * a.ln() + vm1 - lambda * (vm1 - 1.0).ln() + v0 - lambda * (-v0).ln_1p();
            IdentityCheck::new(id, p, real(lhs), real(rhs))
        }
        IdentityId::Tricomi18 => {
            check_positive(a, lambda, false)?;
            let (cutoff, b) = (p.need_cutoff()?, p.need_b()?);
            let (lhs, rhs) = tricomi_sides(|q: f64| angle_tau(a, q, lambda).unwrap_or(f64::NAN), cutoff, b, spec)?;
            IdentityCheck::new(id, p, real(lhs), real(rhs))
        }
        IdentityId::TauIdentity => {
            check_positive(a, lambda, false)?;
            let cutoff = p.need_cutoff()?;
            if !(cutoff > 0.0 && cutoff.is_finite()) {
                return domain(format!("cutoff must be positive, got {cutoff}"));
            }
            let (plus, minus, rhs) = tau_identity_sides(|q: f64| angle_tau(a, q, lambda).unwrap_or(f64::NAN), cutoff, spec)?;
            // Report the worse of the two signs.
            let lhs = if (plus - rhs).abs() >= (minus - rhs).abs() { plus } else { minus };
            IdentityCheck::new(id, p, real(lhs), real(rhs))
        }
    }
}

/// The negative-coupling identities with the branch sum replaced by the
/// `W_{-1}` term alone: what plain continuation from `λ > 0` would predict.
/// The residual is expected to be large.
pub fn check_naive_continuation(id: IdentityId, params: &Params, spec: &QuadSpec) -> Result<IdentityCheck> {
    let (a, lambda) = (params.a, params.lambda);
    check_negative(a, lambda, false)?;
    let (_, vm1) = v_negative(a, lambda)?;
    match id {
        IdentityId::Jneg1 => {
            let z = params.need_z()?;
            check_z(z)?;
            let lhs = angle_against_pole(a, lambda, z, spec)?;
            IdentityCheck::new(id, *params, lhs, j1_closed(a, lambda, z, vm1))
        }
        IdentityId::Jneg2 => {
            let lhs = angle_subtracted(a, lambda, spec)?;
            IdentityCheck::new(id, *params, real(lhs), real(vm1 - 1.0 - a))
        }
        _ => Err(Error::Config(format!("no naive continuation is defined for {id}"))),
    }
}

/// Homogeneous Carleman solution `h_λ(a)`: zero for `λ ≥ 0` and
/// `-V_0 + λ ln(1 - V_0)` for `λ < 0`.
///
/// The printed `λ ln(V_0 - 1)` takes the log of a negative number; the real
/// form drops its constant imaginary part `λπ`. It is flat at `λ = 0`, of
/// size `e^{-(1+a)/|λ|}`.
pub fn h_flat(a: f64, lambda: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return domain(format!("h_λ(a) needs a ≥ 0, got {a}"));
    }
    if !(lambda > -crate::INV_LOG4 && lambda.is_finite()) {
        return domain(format!("h_λ(a) needs λ > -1/ln 4, got {lambda}"));
    }
    if lambda >= 0.0 {
        return Ok(0.0);
    }
    let (v0, _) = v_negative(a, lambda)?;
    Ok(-v0 + lambda * (-v0).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec::with_tol(1e-10)
    }

    #[test]
    fn every_identity_holds_on_its_sample() {
        for id in IdentityId::ALL {
            for p in id.sample_params() {
                let c = check(id, &p, &spec()).unwrap_or_else(|e| panic!("{id} at {p:?}: {e}"));
                assert!(c.residual <= 1e-6, "{id} at {p:?}: {c:?}");
            }
        }
    }

    #[test]
    fn k_integral_at_unit_point() {
        // V_0 = W_0(e²) at a = λ = 1.
        let c = check(IdentityId::KLambertInt, &Params::new(1.0, 1.0), &spec()).unwrap();
        assert!((c.rhs.re - (1.557_145_598_997_611_4 - 2.0)).abs() < 1e-15);
        assert!(c.residual <= 1e-6);
    }

    #[test]
    fn j1_for_complex_z() {
        for z in [Complex64::new(1.0, 1.0), Complex64::new(-0.5, 2.0)] {
            for (a, lambda) in [(0.0, 0.5), (1.0, 1.0), (2.0, 3.0)] {
                let c = check(IdentityId::J1, &Params::new(a, lambda).with_z(z), &spec()).unwrap();
                assert!(c.residual <= 1e-6, "{c:?}");
                assert!(c.lhs.im.abs() > 1e-3);
            }
        }
    }

    #[test]
    fn j1_is_trivial_at_zero_coupling() {
        let c = check(IdentityId::J1, &Params::new(1.0, 0.0).with_z(real(0.3)), &spec()).unwrap();
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn naive_continuation_fails() {
        let p = Params::new(1.0, -0.5);
        let naive = check_naive_continuation(IdentityId::Jneg2, &p, &spec()).unwrap();
        assert!(naive.residual > 1e-2, "{naive:?}");
        let naive = check_naive_continuation(IdentityId::Jneg1, &p.with_z(real(0.7)), &spec()).unwrap();
        assert!(naive.residual > 1e-2, "{naive:?}");
        assert!(check(IdentityId::Jneg2, &p, &spec()).unwrap().residual <= 1e-6);
    }

    #[test]
    fn domains_are_enforced() {
        assert!(matches!(check(IdentityId::J2, &Params::new(1.0, -0.5), &spec()), Err(Error::Domain(_))));
        assert!(matches!(check(IdentityId::Jneg2, &Params::new(1.0, 0.5), &spec()), Err(Error::Domain(_))));
        assert!(matches!(
            check(IdentityId::J1, &Params::new(1.0, 0.5).with_z(real(-2.0)), &spec()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(check(IdentityId::J1, &Params::new(1.0, 0.5), &spec()), Err(Error::Config(_))));
        assert_eq!("jneg_1".parse::<IdentityId>().unwrap(), IdentityId::Jneg1);
    }

    #[test]
    fn json_record_has_the_published_fields() {
        let c = check(IdentityId::J2, &Params::new(1.0, 1.0), &spec()).unwrap();
        let j = c.to_json(1e-6);
        assert_eq!(j["identity_id"], "J2");
        assert_eq!(j["pass"], true);
        assert_eq!(j["params"]["a"], 1.0);
        assert!(j["params"].get("z").is_none());
    }

    #[test]
    fn h_is_flat_at_zero() {
        assert_eq!(h_flat(1.0, 0.5).unwrap(), 0.0);
        assert!(h_flat(1.0, -0.1).unwrap().abs() <= 1e-8);
        assert!(h_flat(1.0, -0.5).unwrap().abs() > 1e-3);
        for a in [0.0, 1.0, 4.0] {
            let h = 1e-3;
            let slope = (h_flat(a, 0.0).unwrap() - h_flat(a, -h).unwrap()) / h;
            assert!(slope.abs() <= 1e-6);
            let slope = (h_flat(a, -0.02).unwrap() - h_flat(a, -0.04).unwrap()) / 0.02;
            assert!(slope.abs() <= 1e-6);
        }
    }
}
