//! Weighted subproblems shared by every reweighted method.
//!
//! Prox weights passed to [`prox_weighted_l1`] and [`prox_weighted_l2`] are
//! already scaled: with reweighting multipliers `s` the l1 term is
//! `sum_i w_i |x_i|` and the l2 term is `1/2 sum_i w_i x_i^2`, where in both
//! cases `w = lambda p s` (see [`Weights::folded`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{LeastSquares, LpProblem, SmoothObjective};

/// Cap on proximal steps inside [`weighted_l1_solve`] and [`weighted_l2_solve`].
pub const MAX_SUBPROBLEM_STEPS: usize = 100_000;

/// Backtracking parameters for the `L_k` line search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxConfig {
    pub l_min: f64,
    pub l_max: f64,
    /// Growth factor applied to `L` after a rejected step.
    pub tau: f64,
    /// Sufficient-decrease constant.
    pub c: f64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        Self {
            l_min: 1e-8,
            l_max: 1e8,
            tau: 1.1,
            c: 1e-4,
        }
    }
}

impl ProxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min > 0.0 && self.l_min < self.l_max && self.l_max.is_finite()) {
            return Err(Error::Configuration(format!(
                "need 0 < l_min < l_max, got [{}, {}]",
                self.l_min, self.l_max
            )));
        }
        if !(self.tau > 1.0) {
            return Err(Error::Configuration(format!("tau must exceed 1, got {}", self.tau)));
        }
        if !(self.c > 0.0) {
            return Err(Error::Configuration(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }

    pub fn clamp(&self, l: f64) -> f64 {
        l.max(self.l_min).min(self.l_max)
    }

    /// Worst-case number of trial steps before the descent test passes:
    /// `ceil((ln(L_f + c) - ln(2 L_min)) / ln(tau) + 2)`.
    pub fn inner_iteration_cap(&self, lipschitz: f64) -> usize {
        let v = ((lipschitz + self.c).ln() - (2.0 * self.l_min).ln()) / self.tau.ln() + 2.0;
        v.ceil().max(1.0) as usize
    }

    /// A rejection at `L` above this value contradicts the acceptance guarantee.
    pub fn hard_cap(&self, lipschitz: f64) -> f64 {
        self.tau * (lipschitz + self.c)
    }
}

/// Exponent of the reweighted term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alpha {
    One,
    Two,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::One => 1.0,
            Alpha::Two => 2.0,
        }
    }

    pub fn from_int(a: u32) -> Result<Self> {
        match a {
            1 => Ok(Alpha::One),
            2 => Ok(Alpha::Two),
            other => Err(Error::InvalidParameter(format!("alpha must be 1 or 2, got {other}"))),
        }
    }
}

/// Reweighting multipliers `s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub s: DVector<f64>,
    pub alpha: Alpha,
}

impl Weights {
    /// `lambda p s`, the weight vector the prox routines take.
    pub fn folded(&self, lambda: f64, p: f64) -> DVector<f64> {
        &self.s * (lambda * p)
    }
}

/// `s_i = (|x_i|^alpha + eps_i)^(p/alpha - 1)`.
pub fn weights_type12(x: &DVector<f64>, eps: &DVector<f64>, p: f64, alpha: Alpha) -> Result<Weights> {
    if eps.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: eps.len(),
        });
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidParameter(format!("eps entries must be positive, got {e}")));
    }
    let a = alpha.value();
    let expo = p / a - 1.0;
    let s = DVector::from_iterator(
        x.len(),
        x.iter().zip(eps.iter()).map(|(&xi, &ei)| (xi.abs().powf(a) + ei).powf(expo)),
    );
    Ok(Weights { s, alpha })
}

/// Exponent `q` with `alpha/p + 1/q = 1`, driving the reweighting majorizer.
pub fn majorizer_exponent(p: f64, alpha: Alpha) -> f64 {
    p / (p - alpha.value())
}

/// `(p/alpha) [(|t|^alpha + delta) s - s^q / q]`; its minimum over `s >= 0` is
/// `(|t|^alpha + delta)^(p/alpha)`, attained at [`majorizer_argmin`].
pub fn majorizer(t: f64, delta: f64, s: f64, p: f64, alpha: Alpha) -> f64 {
    let q = majorizer_exponent(p, alpha);
    p / alpha.value() * ((t.abs().powf(alpha.value()) + delta) * s - s.powf(q) / q)
}

/// `(|t|^alpha + delta)^(1/(q-1))`, the same expression as the type-1/2 weights.
pub fn majorizer_argmin(t: f64, delta: f64, p: f64, alpha: Alpha) -> f64 {
    let q = majorizer_exponent(p, alpha);
    (t.abs().powf(alpha.value()) + delta).powf(1.0 / (q - 1.0))
}

/// `s_i = min(u_eps, |x_i|^(1/(q-1)))`, with `0^(negative) = +inf`.
pub fn weights_new_irl1(x: &DVector<f64>, u_eps: f64, q: f64) -> Weights {
    let expo = 1.0 / (q - 1.0);
    let s = x.map(|xi| {
        if xi == 0.0 {
            u_eps
        } else {
            u_eps.min(xi.abs().powf(expo))
        }
    });
    Weights { s, alpha: Alpha::One }
}

fn check_prox_args(x_bar: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> Result<()> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    for v in [g, w] {
        if v.len() != x_bar.len() {
            return Err(Error::DimensionMismatch {
                expected: x_bar.len(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Minimizer of `g^T (x - x_bar) + L/2 ||x - x_bar||^2 + sum_i w_i |x_i|`
/// (soft thresholding of `x_bar - g / L` at `w / L`).
pub fn prox_weighted_l1(x_bar: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> Result<DVector<f64>> {
    check_prox_args(x_bar, g, l, w)?;
    Ok(prox_l1_unchecked(x_bar, g, l, w))
}

pub(crate) fn prox_l1_unchecked(x_bar: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x_bar.len(),
        x_bar.iter().zip(g.iter()).zip(w.iter()).map(|((&xb, &gi), &wi)| {
            let z = xb - gi / l;
            let m = z.abs() - wi / l;
            if m > 0.0 {
                m.copysign(z)
            } else {
                0.0
            }
        }),
    )
}

/// Minimizer of `g^T (x - x_bar) + L/2 ||x - x_bar||^2 + 1/2 sum_i w_i x_i^2`.
pub fn prox_weighted_l2(x_bar: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> Result<DVector<f64>> {
    check_prox_args(x_bar, g, l, w)?;
    Ok(prox_l2_unchecked(x_bar, g, l, w))
}

pub(crate) fn prox_l2_unchecked(x_bar: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x_bar.len(),
        x_bar
            .iter()
            .zip(g.iter())
            .zip(w.iter())
            .map(|((&xb, &gi), &wi)| (l * xb - gi) / (l + wi)),
    )
}

/// Barzilai-Borwein curvature `dx^T dg / ||dx||^2` clamped to `[l_min, l_max]`;
/// falls back to `previous` (clamped) on degenerate input.
pub fn bb_initial_l(dx: &DVector<f64>, dg: &DVector<f64>, previous: f64, cfg: &ProxConfig) -> f64 {
    let nx = dx.norm_squared();
    if nx > 0.0 {
        let r = dx.dot(dg) / nx;
        if r.is_finite() && r > 0.0 {
            return cfg.clamp(r);
        }
    }
    cfg.clamp(previous)
}

/// Result of one backtracking line search.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub x: DVector<f64>,
    /// Accepted `L`.
    pub l: f64,
    /// Trial steps taken (1 when the first trial is accepted).
    pub inner_count: usize,
}

/// Backtracking on `L`: tries `x+ = prox(L)` starting from `l0` and multiplies
/// `L` by `tau` until `gap(x+) >= c/2 ||x+ - x_k||^2`.
///
/// `gap(x+)` must return the method-specific decrease of the merit function
/// from `x_k` to `x+`.
pub fn line_search_step<G, P>(mut gap: G, mut prox: P, x_k: &DVector<f64>, l0: f64, cfg: &ProxConfig, lipschitz: f64) -> Result<StepOutcome>
where
    G: FnMut(&DVector<f64>) -> f64,
    P: FnMut(f64) -> DVector<f64>,
{
    let cap = cfg.hard_cap(lipschitz);
    let mut l = l0;
    let mut tries = 0;
    loop {
        tries += 1;
        let x = prox(l);
        let d2 = (&x - x_k).norm_squared();
        if gap(&x) >= 0.5 * cfg.c * d2 {
            return Ok(StepOutcome { x, l, inner_count: tries });
        }
        if l > cap {
            return Err(Error::LineSearch { l, cap, tries });
        }
        l *= cfg.tau;
    }
}

/// Result of an exact weighted subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub x: DVector<f64>,
    /// Proximal steps taken (0 for a direct linear solve).
    pub prox_steps: usize,
    /// Largest line-search trial count over all steps.
    pub max_backtracks: usize,
    /// Optimality residual at `x`.
    pub residual: f64,
}

/// `max_i dist(0, grad_i f(x) + w_i d|x_i|)` for the weighted lasso.
pub fn weighted_l1_residual(x: &DVector<f64>, grad: &DVector<f64>, w: &DVector<f64>) -> f64 {
    x.iter()
        .zip(grad.iter())
        .zip(w.iter())
        .map(|((&xi, &gi), &wi)| {
            if xi == 0.0 {
                (gi.abs() - wi).max(0.0)
            } else {
                (gi + wi * xi.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn weighted_l2_residual(x: &DVector<f64>, grad: &DVector<f64>, w: &DVector<f64>) -> f64 {
    x.iter()
        .zip(grad.iter())
        .zip(w.iter())
        .map(|((&xi, &gi), &wi)| (gi + wi * xi).abs())
        .fold(0.0, f64::max)
}

enum Penalty {
    L1,
    L2,
}

impl Penalty {
    // w * (pen(a) - pen(b))
    fn diff(&self, w: f64, a: f64, b: f64) -> f64 {
        match self {
            Penalty::L1 => w * (a.abs() - b.abs()),
            Penalty::L2 => 0.5 * w * (a - b) * (a + b),
        }
    }

    fn prox(&self, x: &DVector<f64>, g: &DVector<f64>, l: f64, w: &DVector<f64>) -> DVector<f64> {
        match self {
            Penalty::L1 => prox_l1_unchecked(x, g, l, w),
            Penalty::L2 => prox_l2_unchecked(x, g, l, w),
        }
    }

    fn residual(&self, x: &DVector<f64>, g: &DVector<f64>, w: &DVector<f64>) -> f64 {
        match self {
            Penalty::L1 => weighted_l1_residual(x, g, w),
            Penalty::L2 => weighted_l2_residual(x, g, w),
        }
    }
}

// Proximal gradient with BB-initialized backtracking on f + penalty(w).
fn prox_gradient_solve<O: SmoothObjective>(
    obj: &O,
    w: &DVector<f64>,
    penalty: Penalty,
    tol: f64,
    x_start: &DVector<f64>,
    cfg: &ProxConfig,
    max_steps: usize,
) -> Result<SubproblemSolution> {
    cfg.validate()?;
    if w.len() != obj.dim() || x_start.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: if w.len() != obj.dim() { w.len() } else { x_start.len() },
        });
    }
    let lf = obj.lipschitz();
    let mut x = x_start.clone();
    let mut g = obj.gradient(&x);
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut l_prev = 1.0;
    let mut max_bt = 0;
    for step in 0..max_steps {
        let resid = penalty.residual(&x, &g, w);
        if resid <= tol {
            return Ok(SubproblemSolution {
                x,
                prox_steps: step,
                max_backtracks: max_bt,
                residual: resid,
            });
        }
        let l0 = match &prev {
            Some((xp, gp)) => bb_initial_l(&(&x - xp), &(&g - gp), l_prev, cfg),
            None => cfg.clamp(1.0),
        };
        let out = line_search_step(
            |y| {
                let reg: f64 = x
                    .iter()
                    .zip(y.iter())
                    .zip(w.iter())
                    .map(|((&a, &b), &wi)| penalty.diff(wi, a, b))
                    .sum();
                obj.decrease(&x, y) + reg
            },
            |l| penalty.prox(&x, &g, l, w),
            &x,
            l0,
            cfg,
            lf,
        )?;
        max_bt = max_bt.max(out.inner_count);
        l_prev = out.l;
        if out.x == x {
            // floating-point fixed point of the prox map
            return Ok(SubproblemSolution {
                prox_steps: step + 1,
                max_backtracks: max_bt,
                residual: resid,
                x,
            });
        }
        let g_new = obj.gradient(&out.x);
        prev = Some((std::mem::replace(&mut x, out.x), std::mem::replace(&mut g, g_new)));
    }
    let residual = penalty.residual(&x, &g, w);
    Err(Error::NonConvergence {
        iterations: max_steps,
        residual,
        best: x.as_slice().to_vec(),
    })
}

/// Solves `min f(x) + sum_i w_i |x_i|` to optimality residual `tol`.
pub fn weighted_l1_solve<O: SmoothObjective>(
    obj: &O,
    w: &DVector<f64>,
    tol: f64,
    x_start: &DVector<f64>,
    cfg: &ProxConfig,
) -> Result<SubproblemSolution> {
    prox_gradient_solve(obj, w, Penalty::L1, tol, x_start, cfg, MAX_SUBPROBLEM_STEPS)
}

/// Solves `(A^T A + Diag(w)) x = A^T b`.
///
/// Uses the `m x m` system `(I + A D^-1 A^T) y = b`, `x = D^-1 A^T y` when
/// `m < n` and all weights are positive; otherwise an `n x n` Cholesky.
pub fn ridge_direct(ls: &LeastSquares, w: &DVector<f64>) -> Option<DVector<f64>> {
    let a = ls.a();
    let (m, n) = a.shape();
    if m < n && w.iter().all(|&v| v > 0.0 && v.is_finite()) {
        let dinv = w.map(|v| 1.0 / v);
        let mut scaled = a.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= dinv[j];
        }
        let k = &scaled * a.transpose() + DMatrix::identity(m, m);
        let y = k.cholesky()?.solve(ls.b());
        return Some(scaled.tr_mul(&y));
    }
    let mut h = a.tr_mul(a);
    for i in 0..n {
        h[(i, i)] += w[i];
    }
    let rhs = a.tr_mul(ls.b());
    Some(h.cholesky()?.solve(&rhs))
}

/// Solves `min f(x) + 1/2 sum_i w_i x_i^2` to gradient residual `tol`.
pub fn weighted_l2_solve<O: SmoothObjective>(
    obj: &O,
    w: &DVector<f64>,
    tol: f64,
    x_start: &DVector<f64>,
    cfg: &ProxConfig,
) -> Result<SubproblemSolution> {
    if let Some(ls) = obj.as_least_squares() {
        if let Some(x) = ridge_direct(ls, w) {
            let residual = weighted_l2_residual(&x, &obj.gradient(&x), w);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(SubproblemSolution {
                    x,
                    prox_steps: 0,
                    max_backtracks: 0,
                    residual,
                });
            }
        }
    }
    prox_gradient_solve(obj, w, Penalty::L2, tol, x_start, cfg, MAX_SUBPROBLEM_STEPS)
}

/// Minimizes `f(x) + (lambda p / alpha) sum_i s_i |x_i|^alpha`.
pub fn exact_weighted_subproblem<O: SmoothObjective>(
    prob: &LpProblem<O>,
    weights: &Weights,
    tol: f64,
    x_start: &DVector<f64>,
    cfg: &ProxConfig,
) -> Result<SubproblemSolution> {
    prob.check_dim(x_start)?;
    let w = weights.folded(prob.lambda(), prob.p());
    match weights.alpha {
        Alpha::One => weighted_l1_solve(prob.objective(), &w, tol, x_start, cfg),
        Alpha::Two => weighted_l2_solve(prob.objective(), &w, tol, x_start, cfg),
    }
}
