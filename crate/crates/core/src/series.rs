//! Perturbative coefficients.
//!
//! Two independent routes to the `λ`-series of `I_λ(a)`:
//!
//! * the Stirling-number formula, [`i_coeffs_conjecture`];
//! * the Lagrange–Bürmann form
//!   `I = -λℓ + Σ_{n≥1} (-λ)^{n+1}/n! · d^{n-1}/da^{n-1} (ℓ^n/(1+a) + ℓ^n/a)`
//!   with `ℓ = log(1+a)`, [`i_coeffs_derivative_form`]. Derivatives are
//!   read off truncated Taylor expansions at `a`, which is exact up to
//!   rounding.
//!
//! `λ`-coefficients of `G` and `N` themselves come from a Cauchy integral on
//! a circle inside the disk of convergence, see [`lambda_taylor`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::special::{dilog_real, ZETA2};

/// Largest `n` whose Stirling numbers fit in `i128`.
pub const STIRLING_MAX_N: usize = 33;

/// Signed Stirling numbers of the first kind, `s_{n,k}` for `0 ≤ k ≤ n ≤ max_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingTable {
    max_n: usize,
    rows: Vec<Vec<i128>>,
}

impl StirlingTable {
    pub fn new(max_n: usize) -> Result<Self> {
        if max_n > STIRLING_MAX_N {
            return domain(format!("Stirling table limited to n ≤ {STIRLING_MAX_N}, asked for {max_n}"));
        }
        // s_{n+1,k} = s_{n,k-1} - n s_{n,k}, s_{0,0} = 1.
        let mut rows = vec![vec![1i128]];
        for n in 0..max_n {
            let prev = &rows[n];
            let mut row = vec![0i128; n + 2];
            for k in 1..=n + 1 {
                let left = prev[k - 1];
                let here = if k <= n { prev[k] } else { 0 };
                row[k] = left - n as i128 * here;
            }
            rows.push(row);
        }
        Ok(StirlingTable { max_n, rows })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// `s_{n,k}`; zero for `k > n`.
    pub fn get(&self, n: usize, k: usize) -> Result<i128> {
        if n > self.max_n {
            return domain(format!("s_{{{n},{k}}} beyond table size {}", self.max_n));
        }
        Ok(if k > n { 0 } else { self.rows[n][k] })
    }

    fn f(&self, n: usize, k: usize) -> f64 {
        if k > n { 0.0 } else { self.rows[n][k] as f64 }
    }
}

/// `s_{n,k}` with `1 ≤ k ≤ n`.
pub fn stirling(n: usize, k: usize, table: &StirlingTable) -> Result<i128> {
    if !(1 <= k && k <= n) {
        return domain(format!("Stirling index out of range: n = {n}, k = {k}"));
    }
    table.get(n, k)
}

/// Coefficients of a power series in `λ`; `coeffs[n]` multiplies `λ^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCoeffs {
    pub coeffs: Vec<f64>,
    pub order: usize,
    pub eval_a: f64,
}

impl SeriesCoeffs {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
    }
}

fn check_order_and_a(a: f64, order: usize) -> Result<()> {
    if order < 1 {
        return Err(Error::Config(format!("series order must be ≥ 1, got {order}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("series coefficients need a > 0, got {a}"));
    }
    Ok(())
}

/// Coefficients of `I_λ(a)` through `λ^order` from the Stirling-number formula.
pub fn i_coeffs_conjecture(a: f64, order: usize) -> Result<SeriesCoeffs> {
    check_order_and_a(a, order)?;
    let table = StirlingTable::new(order.max(1))?;
    let ell = a.ln_1p();
    let mut coeffs = vec![0.0; order + 1];
    coeffs[1] = -ell;
    let mut fact = 1.0; // (n-1)!
    for n in 1..order {
        if n > 1 {
            fact *= (n - 1) as f64;
        }
        let nf = n as f64;
        let mut c = ell.powi(n as i32) / nf * (a.powi(-(n as i32)) + (1.0 + a).powi(-(n as i32)));
        let ratio = (1.0 + a) / a;
        let mut double = 0.0;
        let mut j_fact = 1.0;
        for j in 1..n {
            j_fact *= j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let weight = ratio.powi((n - j) as i32) + 1.0;
            let mut k_fact = 1.0;
            for k in 0..=n {
                if k > 0 {
                    k_fact *= k as f64;
                }
                let s = table.f(j, n - k);
                if s != 0.0 {
                    double += sign * s / (k_fact * j_fact) * weight * ell.powi(k as i32);
                }
            }
        }
        c += fact / (1.0 + a).powi(n as i32) * double;
        coeffs[n + 1] = c;
    }
    Ok(SeriesCoeffs { coeffs, order, eval_a: a })
}

/// Truncated Taylor expansion in `h` of a function at a fixed point.
#[derive(Debug, Clone, PartialEq)]
struct Jet(Vec<f64>);

impl Jet {
    /// `log(1 + a + h)`.
    fn log1p(a: f64, len: usize) -> Jet {
        let mut c = vec![0.0; len];
        c[0] = a.ln_1p();
        let inv = 1.0 / (1.0 + a);
        let mut p = 1.0;
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            p *= inv;
            *ck = if k % 2 == 1 { p } else { -p } / k as f64;
        }
        Jet(c)
    }

    /// `1/(x + h)`.
    fn recip(x: f64, len: usize) -> Jet {
        let mut c = vec![0.0; len];
        let mut p = 1.0 / x;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = if k % 2 == 0 { p } else { -p };
            p /= x;
        }
        Jet(c)
    }

    fn mul(&self, other: &Jet) -> Jet {
        let len = self.0.len();
        let mut c = vec![0.0; len];
        for (i, &x) in self.0.iter().enumerate() {
            for (j, &y) in other.0.iter().take(len - i).enumerate() {
                c[i + j] += x * y;
            }
        }
        Jet(c)
    }

    fn add(&self, other: &Jet) -> Jet {
        Jet(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }
}

/// `[h^{n-1}] ℓ(a+h)^n · w(a+h)` for every `n ≤ order`, i.e.
/// `d^{n-1}/da^{n-1}(ℓ^n w) / (n-1)!`.
fn lagrange_terms(a: f64, order: usize, weight: &Jet) -> Vec<f64> {
    let len = order.max(1);
    let ell = Jet::log1p(a, len);
    let mut power = weight.clone();
    let mut out = vec![0.0; order + 1];
    for n in 1..=order {
        power = power.mul(&ell);
        out[n] = power.0[n - 1];
    }
    out
}

/// Coefficients of `I_λ(a)` through `λ^order` from the Lagrange–Bürmann form.
pub fn i_coeffs_derivative_form(a: f64, order: usize) -> Result<SeriesCoeffs> {
    check_order_and_a(a, order)?;
    let len = order.max(1);
    let weight = Jet::recip(1.0 + a, len).add(&Jet::recip(a, len));
    let terms = lagrange_terms(a, order, &weight);
    let mut coeffs = vec![0.0; order + 1];
    coeffs[1] = -a.ln_1p();
    for n in 1..order {
        // (-λ)^{n+1}/n! · (n-1)! [h^{n-1}] = (-1)^{n+1}/n · terms[n].
        let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[n + 1] = sign * terms[n] / n as f64;
    }
    Ok(SeriesCoeffs { coeffs, order, eval_a: a })
}

/// `λ`-coefficients of `K(a,λ) = Σ λ^n/n! d^{n-1}(-ℓ)^n`.
pub fn k_coeffs(a: f64, order: usize) -> Result<SeriesCoeffs> {
    if !(a >= 0.0) {
        return domain(format!("K coefficients need a ≥ 0, got {a}"));
    }
    let terms = lagrange_terms(a, order, &Jet(std::iter::once(1.0).chain(std::iter::repeat(0.0)).take(order.max(1)).collect()));
    let coeffs = (0..=order)
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * terms[n] / n as f64
        })
        .collect();
    Ok(SeriesCoeffs { coeffs, order, eval_a: a })
}

/// Truncated double Stirling sums for `K` and `L`, valid for `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlSeries {
    pub k: f64,
    pub l: f64,
    /// `|a| ≥ 1`: the sums are outside their disk of convergence.
    pub outside_disk: bool,
}

/// `K = Σ s_{m+n-1,n} (-λ)^n a^m/m!`, `L = Σ s_{m+n,n}/(m+n) (-λ)^n a^m/m!`,
/// `1 ≤ n ≤ order_n`, `m ≤ order_m`.
pub fn kl_stirling_series(a: f64, lambda: f64, order_n: usize, order_m: usize) -> Result<KlSeries> {
    let table = StirlingTable::new(order_n + order_m)?;
    let (mut k, mut l) = (0.0, 0.0);
    let mut am = 1.0; // a^m/m!
    for m in 0..=order_m {
        if m > 0 {
            am *= a / m as f64;
        }
        let mut ln = 1.0; // (-λ)^n
        for n in 1..=order_n {
            ln *= -lambda;
            if m >= 1 {
                k += table.f(m + n - 1, n) * ln * am;
            }
            l += table.f(m + n, n) / (m + n) as f64 * ln * am;
        }
    }
    Ok(KlSeries { k, l, outside_disk: a.abs() >= 1.0 })
}

/// `log(1+x)/x`, `1` at `x = 0`.
fn log1p_over(x: f64) -> f64 {
    if x == 0.0 { 1.0 } else { x.ln_1p() / x }
}

/// Coefficients `(c0, c1, c2)` of `G_λ(a,b) = c0 + c1 λ + c2 λ² + O(λ³)`.
pub fn g_series2(a: f64, b: f64) -> Result<(f64, f64, f64)> {
    if !(a >= 0.0 && b >= 0.0) {
        return domain(format!("G series needs a, b ≥ 0, got ({a}, {b})"));
    }
    let s = 1.0 + a + b;
    let (la, lb) = (a.ln_1p(), b.ln_1p());
    let c0 = 1.0 / s;
    let c1 = (la + lb) / (s * s);
    // (1+2a) log(1+a) / (a(1+a)) with its a → 0 limit.
    let ra = (1.0 + 2.0 * a) / (1.0 + a) * log1p_over(a);
    let rb = (1.0 + 2.0 * b) / (1.0 + b) * log1p_over(b);
    let c2 = -(ra + rb) / (s * s) + (la * la + la * lb + lb * lb + ZETA2 - dilog_real(-a) - dilog_real(-b)) / (s * s * s);
    Ok((c0, c1, c2))
}

/// `[λ²] N_λ(a,b) = (ζ(2) - Li₂(-a) - Li₂(-b))/(1+a+b)² - log(1+a)/(a(1+a+b)) - log(1+b)/(b(1+a+b))`.
pub fn n2_coeff(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return domain(format!("[λ²]N needs a, b ≥ 0, got ({a}, {b})"));
    }
    let (a, b) = (a.min(b), a.max(b));
    let s = 1.0 + a + b;
    Ok((ZETA2 - dilog_real(-a) - dilog_real(-b)) / (s * s) - (log1p_over(a) + log1p_over(b)) / s)
}

/// Taylor coefficients `c_0..c_{count-1}` of a function holomorphic on
/// `|λ| ≤ radius`, by the trapezoidal rule on the circle with `points` nodes.
///
/// The aliasing error of `c_n` is `Σ_j c_{n+j·points} radius^{j·points}`.
pub fn lambda_taylor<F>(f: F, radius: f64, count: usize, points: usize) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    use rayon::prelude::*;
    if !(radius > 0.0) || points < count + 1 {
        return Err(Error::Config(format!("need radius > 0 and points > count, got r = {radius}, {points} points for {count} coefficients")));
    }
    let values = (0..points)
        .into_par_iter()
        .map(|j| f(Complex64::from_polar(radius, 2.0 * PI * j as f64 / points as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..count)
        .map(|n| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (n * j) as f64 / points as f64))
                .sum();
            (s / points as f64).re / radius.powi(n as i32)
        })
        .collect())
}

/// Radius of convergence from the tail of a coefficient list.
///
/// Ratios `|c_n/c_{n+1}|` of a series dominated by one algebraic or
/// logarithmic singularity behave like `R (1 + κ/n + O(1/n²))`; the
/// estimate fits this over the last `window` ratios.
pub fn radius_estimate(coeffs: &[f64], window: usize) -> Result<f64> {
    let ratios: Vec<(f64, f64)> = coeffs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != 0.0 && w[1] != 0.0)
        .map(|(n, w)| (1.0 / n.max(1) as f64, (w[0] / w[1]).abs()))
        .collect();
    if ratios.len() < window.max(3) {
        return Err(Error::Config(format!("need at least {} nonzero coefficient ratios", window.max(3))));
    }
    let tail = &ratios[ratios.len() - window.max(3)..];
    // Least squares on ratio = R + R κ x + c x².
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, y) in tail {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    Ok(solve3(ata, atb)[0])
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap_or(col);
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - s) / m[row][row];
    }
    x
}

/// `λ`-coefficients of `G_λ(a,b)` through `count - 1`.
pub fn g_lambda_coeffs(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    let radius = 0.6;
    let points = (4 * count).max(128);
    lambda_taylor(
        |l| crate::closedform::two_point(crate::closedform::EvalPoint { a, b, lambda: l }).map(|v| v.g),
        radius,
        count,
        points,
    )
}

/// `λ`-coefficients of `N_λ(a,b)` through `count - 1`.
pub fn n_lambda_coeffs(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    let spec = crate::quadrature::QuadSpec::default();
    let (ac, bc) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
    lambda_taylor(
        |l| crate::closedform::n_lambda_complex(ac, bc, l, &spec).map(|v| v.0),
        0.3,
        count,
        (4 * count).max(32),
    )
}
