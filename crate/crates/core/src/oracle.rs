//! Two checks of the integral equation that share no code with the closed form.
//!
//! [`solve_fixed_point`] solves the cutoff-regularised equation on `[0, Λ²]²`
//! by damped iteration. [`residual`] evaluates both sides of the equation on
//! `[0, ∞)²` for any supplied two-point function.
//!
//! At finite cutoff every principal value is finite on its own, so the
//! antisymmetric double term may be pulled apart. With `P` the discrete
//! principal-value operator, `(Pf)_i ≈ PV∫_0^{Λ²} f(p)/(p - x_i) dp`, the
//! equation becomes
//!
//! ```text
//! G_ij (x_i + x_j + μ² + λℓ_i + λℓ_j + λ² (P G Pᵀ)_ij) = (1 + λ(PG)_ij)(1 + λ(G Pᵀ)_ij)
//! ```
//!
//! with `ℓ_i = ln((Λ² - x_i)/x_i)` and `μ² = 1 - 2λ ln(1 + Λ²)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{check_real_coupling, GridSampler};
use crate::error::{domain, no_convergence, Error, Result};
use crate::quadrature::{gauss_legendre, QuadSpec};

/// Points used by the local derivative stencil inside `P`.
const STENCIL: usize = 7;
const DIVERGENCE_BOUND: f64 = 1e6;
/// History length of the Anderson mixer.
const ANDERSON_DEPTH: usize = 8;
/// Residual growth over the best iterate that counts as oscillation.
const OSCILLATION_FACTOR: f64 = 10.0;

/// Converged cutoff solution sampled on a tensor grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridFunction {
    pub lambda: f64,
    /// `Λ²`.
    pub cutoff: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[i][j] ≈ G(nodes[i], nodes[j])`, exactly symmetric.
    pub values: Vec<Vec<f64>>,
    pub tol: f64,
    pub iterations: usize,
    /// `max |F(G) - G|` at the returned grid.
    pub discrete_residual: f64,
    /// Damping in force when the iteration stopped.
    pub damping: f64,
}

impl GridFunction {
    /// Values with a header row and column of nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a\\b");
        for x in &self.nodes {
            out.push_str(&format!(",{x:.17e}"));
        }
        out.push('\n');
        for (x, row) in self.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{x:.17e}"));
            for v in row {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Sidecar describing how the grid was produced.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": "phi4-lambert/1",
            "kind": "oracle_grid",
            "lambda": self.lambda,
            "cutoff": self.cutoff,
            "n_nodes": self.nodes.len(),
            "tol": self.tol,
            "iterations": self.iterations,
            "discrete_residual": self.discrete_residual,
            "damping": self.damping,
        })
    }
}

/// Gauss–Legendre nodes on `[0, L]` under `x = L s / (1 + L(1 - s))`, which
/// keeps unit spacing scale near 0 and thins out towards the cutoff.
fn mapped_rule(cutoff: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, w) = gauss_legendre(n)?;
    let l = cutoff;
    Ok(t.iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let s = 0.5 * (t + 1.0);
            let d = 1.0 + l * (1.0 - s);
            (l * s / d, 0.5 * w * l * (1.0 + l) / (d * d))
        })
        .unzip())
}

/// Weights of the first derivative at `x0` for the interpolant through `xs`.
fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let m = xs.len();
    // Fornberg's recursion, orders 0 and 1 only.
    let mut c = vec![[0.0f64; 2]; m];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..m {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|r| r[1]).collect()
}

/// The discrete principal-value operator `P` and the logs `ℓ_i`.
///
/// Row `i` integrates `(f(p) - f(x_i))/(p - x_i)` with the node rule, using
/// a local derivative for the removable point, then adds `f(x_i) ℓ_i`.
struct PvOperator {
    p: Vec<Vec<f64>>,
    ell: Vec<f64>,
}

impl PvOperator {
    fn new(nodes: &[f64], weights: &[f64], cutoff: f64) -> Self {
        let n = nodes.len();
        let ell: Vec<f64> = nodes.iter().map(|&x| ((cutoff - x) / x).ln()).collect();
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let xi = nodes[i];
                let mut row = vec![0.0; n];
                let mut c = 0.0;
                for k in 0..n {
                    if k != i {
                        row[k] = weights[k] / (nodes[k] - xi);
                        c += row[k];
                    }
                }
                let lo = i.saturating_sub(STENCIL / 2).min(n.saturating_sub(STENCIL));
                let hi = (lo + STENCIL).min(n);
                let d = derivative_weights(xi, &nodes[lo..hi]);
                for (k, dk) in (lo..hi).zip(d) {
                    row[k] += weights[i] * dk;
                }
                row[i] += ell[i] - c;
                row
            })
            .collect();
        PvOperator { p, ell }
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b[0].len();
    a.par_iter()
        .map(|row| {
            let mut out = vec![0.0; m];
            for (aik, bk) in row.iter().zip(b) {
                for (o, &v) in out.iter_mut().zip(bk) {
                    *o += aik * v;
                }
            }
            out
        })
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = a[0].len();
    (0..m).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// `F(G)`: the product form above solved for `G_ij`.
fn update(g: &[Vec<f64>], op: &PvOperator, nodes: &[f64], lambda: f64, mu2: f64) -> Vec<Vec<f64>> {
    let x = matmul(&op.p, g);
    let z = matmul(&x, &transpose(&op.p));
    let n = nodes.len();
    let mut f: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let den = mu2 + nodes[i] + nodes[j] + lambda * (op.ell[i] + op.ell[j]) + lambda * lambda * z[i][j];
                    (1.0 + lambda * x[i][j]) * (1.0 + lambda * x[j][i]) / den
                })
                .collect()
        })
        .collect();
    symmetrize(&mut f);
    f
}

fn symmetrize(g: &mut [Vec<f64>]) {
    for i in 0..g.len() {
        for j in 0..i {
            let m = 0.5 * (g[i][j] + g[j][i]);
            g[i][j] = m;
            g[j][i] = m;
        }
    }
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Discrete cutoff problem: nodes, weights, operator and bare mass.
struct Discretisation {
    lambda: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    op: PvOperator,
    mu2: f64,
}

impl Discretisation {
    fn new(lambda: f64, cutoff: f64, n_nodes: usize) -> Result<Self> {
        check_real_coupling(lambda)?;
        if n_nodes < 16 {
            return Err(Error::Config(format!("the fixed-point solver needs at least 16 nodes, got {n_nodes}")));
        }
        if !(cutoff > 1.0 && cutoff.is_finite()) {
            return Err(Error::Config(format!("cutoff must be finite and > 1, got {cutoff}")));
        }
        let (nodes, weights) = mapped_rule(cutoff, n_nodes)?;
        let op = PvOperator::new(&nodes, &weights, cutoff);
        let mu2 = 1.0 - 2.0 * lambda * cutoff.ln_1p();
        Ok(Discretisation { lambda, nodes, weights, op, mu2 })
    }

    fn apply(&self, g: &[Vec<f64>]) -> Vec<Vec<f64>> {
        update(g, &self.op, &self.nodes, self.lambda, self.mu2)
    }
}

/// Damped iteration `G ← (1-d)G + d F(G)` from `G⁰ = 1/(1+a+b)`, with
/// Anderson mixing over the last few steps.
///
/// Stops once `max |F(G) - G| ≤ tol`. If the residual climbs an order of
/// magnitude above the best seen, the iteration restarts from the best
/// iterate with half the damping.
pub fn solve_fixed_point(
    lambda: f64,
    cutoff: f64,
    n_nodes: usize,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GridFunction> {
    solve_fixed_point_from(lambda, cutoff, n_nodes, damping, tol, max_iter, |a, b| 1.0 / (1.0 + a + b))
}

/// [`solve_fixed_point`] from an arbitrary starting function. The discrete
/// equation has no known uniqueness statement, so comparing starts is how
/// distinct fixed points would show up.
pub fn solve_fixed_point_from(
    lambda: f64,
    cutoff: f64,
    n_nodes: usize,
    damping: f64,
    tol: f64,
    max_iter: usize,
    start: impl Fn(f64, f64) -> f64,
) -> Result<GridFunction> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Config(format!("damping must lie in (0, 1], got {damping}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let disc = Discretisation::new(lambda, cutoff, n_nodes)?;
    let nodes = &disc.nodes;
    // Lower triangle mirrored, so the start is symmetric bit for bit.
    let mut g: Vec<Vec<f64>> = nodes
        .iter()
        .enumerate()
        .map(|(i, &a)| nodes.iter().enumerate().map(|(j, &b)| if j <= i { start(a, b) } else { 0.0 }).collect())
        .collect();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            g[i][j] = g[j][i];
        }
    }
    let mut d = damping;
    let mut last = f64::INFINITY;
    let mut mixer = Anderson::new(ANDERSON_DEPTH);
    let mut best = (f64::INFINITY, g.clone());
    for iter in 1..=max_iter {
        let f = disc.apply(&g);
        let r = max_diff(&f, &g);
        if !r.is_finite() || f.iter().flatten().any(|v| v.abs() > DIVERGENCE_BOUND) {
            return no_convergence(format!(
                "fixed-point iteration diverged at iteration {iter} (λ = {lambda}, Λ² = {cutoff})"
            ));
        }
        if r <= tol {
            return Ok(GridFunction {
                lambda,
                cutoff,
                nodes: disc.nodes.clone(),
                weights: disc.weights.clone(),
                values: g,
                tol,
                iterations: iter,
                discrete_residual: r,
                damping: d,
            });
        }
        last = r;
        if r > OSCILLATION_FACTOR * best.0 {
            // Overshoot: restart from the best iterate with half the damping.
            d *= 0.5;
            mixer.clear();
            g = best.1.clone();
            continue;
        }
        if r < best.0 {
            best = (r, g.clone());
        }
        let flat_g: Vec<f64> = g.iter().flatten().copied().collect();
        let flat_f: Vec<f64> = f.iter().flatten().zip(&flat_g).map(|(f, g)| f - g).collect();
        let next = mixer.step(flat_g, flat_f, d);
        let n = g.len();
        for (i, row) in g.iter_mut().enumerate() {
            row.copy_from_slice(&next[i * n..(i + 1) * n]);
        }
        symmetrize(&mut g);
    }
    no_convergence(format!(
        "fixed-point iteration did not reach {tol:e} in {max_iter} iterations; last residual {last:e}"
    ))
}

/// Anderson mixing over the damped update.
///
/// With empty history a step is exactly `G + d (F(G) - G)`. Otherwise the
/// step is taken from the affine combination of recent iterates whose
/// residuals cancel best in the least-squares sense, which removes the slowly
/// growing modes plain damping leaves behind.
struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    dg: std::collections::VecDeque<Vec<f64>>,
    df: std::collections::VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson { depth, prev: None, dg: Default::default(), df: Default::default() }
    }

    fn clear(&mut self) {
        self.prev = None;
        self.dg.clear();
        self.df.clear();
    }

    fn step(&mut self, g: Vec<f64>, f: Vec<f64>, d: f64) -> Vec<f64> {
        if let Some((pg, pf)) = self.prev.take() {
            self.dg.push_back(g.iter().zip(&pg).map(|(a, b)| a - b).collect());
            self.df.push_back(f.iter().zip(&pf).map(|(a, b)| a - b).collect());
            if self.dg.len() > self.depth {
                self.dg.pop_front();
                self.df.pop_front();
            }
        }
        let m = self.df.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut gram: Vec<Vec<f64>> = (0..m).map(|j| (0..m).map(|l| dot(&self.df[j], &self.df[l])).collect()).collect();
        let mut rhs: Vec<f64> = (0..m).map(|j| dot(&self.df[j], &f)).collect();
        let trace: f64 = (0..m).map(|j| gram[j][j]).sum();
        for (j, row) in gram.iter_mut().enumerate() {
            row[j] += 1e-12 * trace + f64::MIN_POSITIVE;
        }
        let gamma = solve_dense(&mut gram, &mut rhs).unwrap_or_else(|| vec![0.0; m]);
        let mut next: Vec<f64> = g.iter().zip(&f).map(|(g, f)| g + d * f).collect();
        for (j, &c) in gamma.iter().enumerate() {
            for ((x, a), b) in next.iter_mut().zip(&self.dg[j]).zip(&self.df[j]) {
                *x -= c * (a + d * b);
            }
        }
        self.prev = Some((g, f));
        next
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Barycentric weights of Gauss–Legendre nodes `t`.
fn barycentric_weights(t: &[f64], w: &[f64]) -> Vec<f64> {
    t.iter()
        .zip(w)
        .enumerate()
        .map(|(j, (&t, &w))| if j % 2 == 0 { 1.0 } else { -1.0 } * ((1.0 - t * t) * w).sqrt())
        .collect()
}

/// Row-stochastic matrix interpolating node values at `t_from` onto `t_to`.
fn interpolation_matrix(t_from: &[f64], bw: &[f64], t_to: &[f64]) -> Vec<Vec<f64>> {
    t_to.iter()
        .map(|&t| {
            if let Some(j) = t_from.iter().position(|&s| s == t) {
                let mut row = vec![0.0; t_from.len()];
                row[j] = 1.0;
                return row;
            }
            let terms: Vec<f64> = t_from.iter().zip(bw).map(|(&s, &b)| b / (t - s)).collect();
            let sum: f64 = terms.iter().sum();
            terms.iter().map(|v| v / sum).collect()
        })
        .collect()
}

/// `max |F(G̃) - G̃|` where `G̃` is the grid interpolated onto a rule with
/// `factor` times as many nodes. A solution locked to its own nodes shows up
/// here as a residual far above the iteration tolerance.
pub fn refined_residual(grid: &GridFunction, factor: usize) -> Result<f64> {
    let n = grid.nodes.len();
    let disc = Discretisation::new(grid.lambda, grid.cutoff, factor.max(1) * n)?;
    let (t_from, w_from) = gauss_legendre(n)?;
    let (t_to, _) = gauss_legendre(disc.nodes.len())?;
    let m = interpolation_matrix(&t_from, &barycentric_weights(&t_from, &w_from), &t_to);
    let fine = matmul(&matmul(&m, &grid.values), &transpose(&m));
    Ok(max_diff(&disc.apply(&fine), &fine))
}

/// Largest `|G_ij - G(x_i, x_j)|` against the closed form over nodes with
/// `a, b ≤ Λ²/4`, away from the cutoff's influence.
pub fn closedform_deviation(grid: &GridFunction) -> Result<f64> {
    let sampler = GridSampler::new(grid.lambda)?;
    let inner: Vec<usize> = (0..grid.nodes.len()).filter(|&i| grid.nodes[i] <= grid.cutoff / 4.0).collect();
    let xs: Vec<f64> = inner.iter().map(|&i| grid.nodes[i]).collect();
    let exact = sampler.g_matrix(&xs, &xs)?;
    let mut dev = 0.0f64;
    for (r, &i) in inner.iter().enumerate() {
        for (c, &j) in inner.iter().enumerate() {
            dev = dev.max((grid.values[i][j] - exact[r][c]).abs());
        }
    }
    Ok(dev)
}

/// Solves the cutoff equation at each `Λ²` and reports [`closedform_deviation`].
pub fn compare_oracle_to_closedform(lambda: f64, cutoffs: &[f64], n_nodes: usize) -> Result<Vec<(f64, f64)>> {
    if !(lambda >= 0.0) {
        return domain(format!("the cutoff comparison is stated for λ ≥ 0, got {lambda}"));
    }
    cutoffs
        .iter()
        .map(|&cutoff| {
            let grid = solve_fixed_point(lambda, cutoff, n_nodes, 0.5, 1e-10, 5000)?;
            Ok((cutoff, closedform_deviation(&grid)?))
        })
        .collect()
}

/// Anything that can produce `G(x_i, y_j)` on a tensor grid.
pub trait TwoPointSource: Sync {
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>>;
}

impl<F: Fn(f64, f64) -> f64 + Sync> TwoPointSource for F {
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(xs.par_iter().map(|&x| ys.iter().map(|&y| self(x, y)).collect()).collect())
    }
}

/// The closed form, sampled in bulk.
impl TwoPointSource for GridSampler {
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.g_matrix(xs, ys)
    }
}

/// Both sides of the integral equation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub point: (f64, f64),
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    /// `abs_residual / |lhs|`.
    pub rel_residual: f64,
    /// Contribution to `rhs` from `p > tail_cutoff` or `q > tail_cutoff`.
    pub tail_estimate: f64,
    /// Change in `rhs` between two node counts.
    pub quad_error: f64,
}

/// Composite Gauss rule on `[0, ∞)`: panels with breakpoints at every
/// special point and at `0.25·2^k` up to `tail`, then `p = tail/u²` on `(0, 1]`.
struct HalfLineRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    tail: f64,
}

impl HalfLineRule {
    fn new(specials: &[f64], tail: f64, per_panel: usize) -> Result<Self> {
        let mut breaks = vec![0.0, tail];
        breaks.extend(specials.iter().copied().filter(|&x| x > 0.0 && x < tail));
        let mut x = 0.25;
        while x < tail {
            breaks.push(x);
            x *= 2.0;
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        let (t, w) = gauss_legendre(per_panel)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            for (&t, &w) in t.iter().zip(&w) {
                nodes.push(lo + 0.5 * (hi - lo) * (t + 1.0));
                weights.push(0.5 * (hi - lo) * w);
            }
        }
        // Graded panels in u: the mapped integrand behaves like u ln u at 0.
        let ubreaks = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.4, 1.0];
        for pair in ubreaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            for (&t, &w) in t.iter().zip(&w) {
                let u = lo + 0.5 * (hi - lo) * (t + 1.0);
                nodes.push(tail / (u * u));
                weights.push(0.5 * (hi - lo) * w * 2.0 * tail / (u * u * u));
            }
        }
        Ok(HalfLineRule { nodes, weights, tail })
    }
}

/// Right-hand side and its tail part, given `G` on the rule nodes and at the specials.
fn rhs_at(rule: &HalfLineRule, m: &[Vec<f64>], ia: usize, ib: usize, a: f64, b: f64, lambda: f64) -> (f64, f64) {
    let n = rule.nodes.len();
    let (p, w) = (&rule.nodes, &rule.weights);
    let gab = m[ia][ib];
    let (mut single, mut single_tail) = (0.0, 0.0);
    for k in 0..n {
        let term = w[k]
            * ((m[k][ib] - gab) / (p[k] - a) + gab / (1.0 + p[k]) + (m[ia][k] - gab) / (p[k] - b) + gab / (1.0 + p[k]));
        single += term;
        if p[k] > rule.tail {
            single_tail += term;
        }
    }
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (mut s, mut st) = (0.0, 0.0);
            let dk = p[k] - a;
            for l in 0..n {
                let term = w[k] * w[l] * (gab * m[k][l] - m[ia][l] * m[k][ib]) / (dk * (p[l] - b));
                s += term;
                if p[k] > rule.tail || p[l] > rule.tail {
                    st += term;
                }
            }
            (s, st)
        })
        .collect();
    let (double, double_tail) = rows.iter().fold((0.0, 0.0), |(s, t), &(x, y)| (s + x, t + y));
    (
        1.0 + lambda * single - lambda * lambda * double,
        lambda * single_tail - lambda * lambda * double_tail,
    )
}

fn batch_with_rule<S: TwoPointSource + ?Sized>(
    g: &S,
    points: &[(f64, f64)],
    lambda: f64,
    tail: f64,
    per_panel: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut specials: Vec<f64> = points.iter().flat_map(|&(a, b)| [a, b]).collect();
    specials.sort_by(f64::total_cmp);
    specials.dedup();
    let rule = HalfLineRule::new(&specials, tail, per_panel)?;
    let n = rule.nodes.len();
    let mut all = rule.nodes.clone();
    all.extend(&specials);
    let m = g.matrix(&all, &all)?;
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return no_convergence("two-point function is not finite on the residual grid");
    }
    let index = |x: f64| n + specials.iter().position(|&s| s == x).unwrap_or(0);
    Ok(points
        .iter()
        .map(|&(a, b)| {
            let (ia, ib) = (index(a), index(b));
            let (rhs, tail) = rhs_at(&rule, &m, ia, ib, a, b, lambda);
            ((1.0 + a + b) * m[ia][ib], rhs, tail)
        })
        .collect())
}

/// [`residual`] at many points sharing one quadrature grid.
pub fn residual_batch<S: TwoPointSource + ?Sized>(
    g: &S,
    points: &[(f64, f64)],
    lambda: f64,
    spec: &QuadSpec,
) -> Result<Vec<ResidualReport>> {
    if points.iter().any(|&(a, b)| !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite())) {
        return domain("residual points must be finite with a, b ≥ 0");
    }
    if !lambda.is_finite() || !(spec.tail_cutoff > 1.0) {
        return Err(Error::Config("residual needs a finite λ and tail_cutoff > 1".into()));
    }
    let coarse = batch_with_rule(g, points, lambda, spec.tail_cutoff, 12)?;
    let fine = batch_with_rule(g, points, lambda, spec.tail_cutoff, 20)?;
    Ok(points
        .iter()
        .zip(coarse.iter().zip(&fine))
        .map(|(&point, (&(_, rc, _), &(lhs, rhs, tail_estimate)))| {
            let abs_residual = (lhs - rhs).abs();
            ResidualReport {
                point,
                lhs,
                rhs,
                abs_residual,
                rel_residual: abs_residual / lhs.abs(),
                tail_estimate,
                quad_error: (rhs - rc).abs(),
            }
        })
        .collect())
}

/// Evaluates `(1+a+b) g(a,b)` and the right-hand side of the integral equation.
///
/// The double term keeps the numerator `g(a,b)g(p,q) - g(a,q)g(p,b)` intact;
/// only that combination is integrable. Points `a`, `b` are panel endpoints,
/// so no node sits on the removable singularities.
pub fn residual<S: TwoPointSource + ?Sized>(g: &S, a: f64, b: f64, lambda: f64, spec: &QuadSpec) -> Result<ResidualReport> {
    residual_batch(g, &[(a, b)], lambda, spec).map(|mut v| v.remove(0))
}
