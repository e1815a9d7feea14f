//! Reweighted drivers.
//!
//! | method          | eps                      | step                                  |
//! |-----------------|--------------------------|---------------------------------------|
//! | `Type1*`        | phases `eps^k -> 0`      | IRL-alpha on `Fbar_{alpha,eps^k}` until the perturbed residual drops below `delta_k` |
//! | `Type2*`        | one step per `eps^k`     | one reweighted step per `eps^k`       |
//! | `NewIrl1*`      | fixed, below threshold   | reweighted l1 on `F_eps`              |
//!
//! `*Exact` solves each weighted subproblem to high accuracy; `*Prox` replaces
//! it by a single linearized proximal step with backtracking on `L_k`.
//! All methods share the stopping rule `||X grad f(x) + lambda p |x|^p||_inf <= tol`.

mod lasso;
mod new_irl1;
mod type1;
mod type2;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{pow_shift, LpProblem, SmoothObjective};
use crate::stationarity::{residual_with_gradient, StationarityReport};
use crate::subproblems::{
    bb_initial_l, line_search_step, prox_l1_unchecked, prox_l2_unchecked, weighted_l1_solve, weighted_l2_solve, Alpha, ProxConfig,
};

pub use crate::subproblems::bb_initial_l as bb_initial_L;
pub use lasso::solve_lasso_warmstart;
pub use new_irl1::solve_new_irl1;
pub use type1::solve_type1;
pub use type2::solve_type2;
pub use verify::{verify_run, InvariantCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Type1Exact,
    Type1Prox,
    Type2Exact,
    Type2Prox,
    NewIrl1Exact,
    NewIrl1Prox,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Type1Exact,
        Method::Type1Prox,
        Method::Type2Exact,
        Method::Type2Prox,
        Method::NewIrl1Exact,
        Method::NewIrl1Prox,
    ];

    pub fn is_prox(self) -> bool {
        matches!(self, Method::Type1Prox | Method::Type2Prox | Method::NewIrl1Prox)
    }

    pub fn family(self) -> Family {
        match self {
            Method::Type1Exact | Method::Type1Prox => Family::Type1,
            Method::Type2Exact | Method::Type2Prox => Family::Type2,
            Method::NewIrl1Exact | Method::NewIrl1Prox => Family::NewIrl1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Type1Exact => "type1-exact",
            Method::Type1Prox => "type1-prox",
            Method::Type2Exact => "type2-exact",
            Method::Type2Prox => "type2-prox",
            Method::NewIrl1Exact => "new-irl1-exact",
            Method::NewIrl1Prox => "new-irl1-prox",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.trim().to_ascii_lowercase().as_str() {
            "type1-exact" => Method::Type1Exact,
            "type1-prox" | "irl1-1" => Method::Type1Prox,
            "type2-exact" => Method::Type2Exact,
            "type2-prox" | "irl1-2" => Method::Type2Prox,
            "new-irl1-exact" => Method::NewIrl1Exact,
            "new-irl1-prox" | "irl1-3" => Method::NewIrl1Prox,
            other => return Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        };
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Type1,
    Type2,
    NewIrl1,
}

/// `k -> scale * ratio^k`, applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometric {
    pub scale: f64,
    pub ratio: f64,
}

impl Geometric {
    pub fn new(scale: f64, ratio: f64) -> Self {
        Self { scale, ratio }
    }

    pub fn at(&self, k: usize) -> f64 {
        self.scale * self.ratio.powi(k as i32)
    }

    pub fn vector(&self, k: usize, n: usize) -> DVector<f64> {
        DVector::from_element(n, self.at(k))
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.scale > 0.0 && self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Configuration(format!(
                "{what} schedule needs scale > 0 and ratio in (0, 1), got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Ignored by the `NewIrl1*` methods, which are l1 reweighting.
    pub alpha: Alpha,
    pub eps_schedule: Geometric,
    /// Type-1 only.
    pub delta_schedule: Geometric,
    /// `NewIrl1*` only; computed from the threshold when `None`.
    pub fixed_eps: Option<f64>,
    /// Tolerance handed to the threshold computation when `fixed_eps` is `None`.
    pub eps_threshold_tol: f64,
    pub termination_tol: f64,
    /// Outer iterations (type-2, new IRL1) or eps phases (type-1).
    pub max_outer: usize,
    /// Type-1 only: reweighting steps allowed inside one eps phase.
    pub max_inner_per_phase: usize,
    pub prox: ProxConfig,
    /// Overrides the default accuracy of `*Exact` subproblem solves.
    pub subproblem_tol: Option<f64>,
    /// Recorded in run metadata; the solvers themselves are deterministic.
    pub rng_seed: u64,
    /// Keep every iterate in [`SolverRun::path`].
    pub record_path: bool,
}

impl SolverConfig {
    /// Defaults used throughout the experiments:
    /// type-1 `eps^k = delta_k = 0.1^k`, type-2 `eps^k = 0.995^k`.
    pub fn new(method: Method) -> Self {
        let (eps_schedule, max_outer) = match method.family() {
            Family::Type1 => (Geometric::new(1.0, 0.1), 50),
            // 0.995^500 is still about 0.08, far from the residual target
            Family::Type2 => (Geometric::new(1.0, 0.995), 5000),
            Family::NewIrl1 => (Geometric::new(1.0, 0.1), 500),
        };
        Self {
            method,
            alpha: Alpha::One,
            eps_schedule,
            delta_schedule: Geometric::new(1.0, 0.1),
            fixed_eps: None,
            eps_threshold_tol: 1e-6,
            termination_tol: 1e-4,
            max_outer,
            max_inner_per_phase: 5000,
            prox: ProxConfig::default(),
            subproblem_tol: None,
            rng_seed: 0,
            record_path: false,
        }
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.termination_tol = tol;
        self
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn with_path(mut self) -> Self {
        self.record_path = true;
        self
    }

    /// Effective alpha (always one for the new IRL1 family).
    pub fn effective_alpha(&self) -> Alpha {
        match self.method.family() {
            Family::NewIrl1 => Alpha::One,
            _ => self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prox.validate()?;
        if !(self.termination_tol > 0.0) {
            return Err(Error::Configuration("termination_tol must be positive".into()));
        }
        match self.method.family() {
            Family::Type1 => {
                self.eps_schedule.validate("eps")?;
                self.delta_schedule.validate("delta")?;
            }
            Family::Type2 => self.eps_schedule.validate("eps")?,
            Family::NewIrl1 => {
                if let Some(e) = self.fixed_eps {
                    if !(e > 0.0) {
                        return Err(Error::Configuration(format!("fixed_eps must be positive, got {e}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterations,
    Error,
}

/// Per-iterate summary. Entry 0 describes the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    /// Eps phase for type-1 runs, otherwise 0.
    pub phase: usize,
    /// `F(x^k)`.
    pub objective: f64,
    /// Merit value whose monotone decrease the method guarantees:
    /// `F_eps` (new IRL1), `Fbar_{alpha,eps^k}` (type-2) or `Fbar_{alpha,eps}`
    /// of the current phase (type-1).
    pub merit: f64,
    pub residual: f64,
    pub step_norm: f64,
    pub support_size: usize,
    /// Accepted `L_k` (prox modes).
    pub l_final: Option<f64>,
    /// Line-search trials (prox modes) or subproblem prox steps (exact modes).
    pub inner_count: usize,
    /// Largest trial count of any line search performed in this step.
    pub max_backtracks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub method: Method,
    pub alpha: Alpha,
    pub lambda: f64,
    pub p: f64,
    pub n: usize,
    pub lipschitz: f64,
    pub prox: ProxConfig,
    pub termination_tol: f64,
    pub fixed_eps: Option<f64>,
    /// `F(x0)`.
    pub f_x0: f64,
    /// Slack such that every iterate satisfies `F(x^k) <= F(x0) + bound_eps`;
    /// feeds the first-order lower bound in `report`.
    pub bound_eps: f64,
    /// Fixed-eps runs: whether `F_eps(final) <= F_eps(x0)`.
    pub eps_descent_holds: Option<bool>,
    pub trace: Vec<TraceEntry>,
    pub x0: Vec<f64>,
    pub final_x: Vec<f64>,
    pub status: Status,
    pub message: Option<String>,
    pub report: Option<StationarityReport>,
    pub path: Option<Vec<Vec<f64>>>,
}

impl SolverRun {
    /// Reweighting steps taken.
    pub fn outer_iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn total_inner(&self) -> usize {
        self.trace.iter().map(|e| e.inner_count).sum()
    }

    pub fn max_backtracks(&self) -> usize {
        self.trace.iter().map(|e| e.max_backtracks).max().unwrap_or(0)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.trace.last().map(|e| e.objective)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.trace.last().map(|e| e.residual)
    }

    pub fn final_x(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.final_x)
    }
}

/// Runs the configured method from `x0`.
pub fn solve<O: SmoothObjective>(prob: &LpProblem<O>, cfg: &SolverConfig, x0: &DVector<f64>) -> Result<SolverRun> {
    match cfg.method.family() {
        Family::Type1 => solve_type1(prob, cfg, x0),
        Family::Type2 => solve_type2(prob, cfg, x0),
        Family::NewIrl1 => solve_new_irl1(prob, cfg, x0),
    }
}

/// `(|t|^alpha + e)^(p/alpha)`.
#[inline]
pub(crate) fn smoothed_term(t: f64, e: f64, p: f64, alpha: Alpha) -> f64 {
    match alpha {
        Alpha::One => (t.abs() + e).powf(p),
        Alpha::Two => (t * t + e).powf(0.5 * p),
    }
}

/// `Fbar_{alpha,eps}(x) = f(x) + lambda sum_i (|x_i|^alpha + eps_i)^(p/alpha)`.
pub fn smoothed_value<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>, eps: &DVector<f64>, alpha: Alpha) -> Result<f64> {
    prob.check_dim(x)?;
    if eps.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: eps.len(),
        });
    }
    Ok(smoothed_value_unchecked(prob, x, eps, alpha))
}

pub(crate) fn smoothed_value_unchecked<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>, eps: &DVector<f64>, alpha: Alpha) -> f64 {
    let p = prob.p();
    let reg: f64 = x.iter().zip(eps.iter()).map(|(&t, &e)| smoothed_term(t, e, p, alpha)).sum();
    prob.objective().value(x) + prob.lambda() * reg
}

/// `||X grad f(x) + lambda p |X|^alpha (|x|^alpha + eps)^(p/alpha - 1)||_inf`.
pub fn perturbed_residual(lambda: f64, p: f64, alpha: Alpha, x: &DVector<f64>, grad: &DVector<f64>, eps: &DVector<f64>) -> f64 {
    let a = alpha.value();
    x.iter()
        .zip(grad.iter())
        .zip(eps.iter())
        .map(|((&xi, &gi), &ei)| {
            let xa = xi.abs().powf(a);
            (xi * gi + lambda * p * xa * (xa + ei).powf(p / a - 1.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Smallest accuracy requested from exact subproblems.
const SUBPROBLEM_TOL_FLOOR: f64 = 1e-12;

/// Message attached to runs that stop because a step left the iterate
/// unchanged while the residual was still above tolerance.
pub(crate) const STALLED: &str = "stalled: step left the iterate unchanged above tolerance";

// State shared by the drivers: the current iterate with its cached gradient,
// the BB memory and the trace under construction.
pub(crate) struct Driver<'a, O> {
    pub prob: &'a LpProblem<O>,
    pub cfg: &'a SolverConfig,
    pub x: DVector<f64>,
    pub grad: DVector<f64>,
    pub prev: Option<(DVector<f64>, DVector<f64>)>,
    pub l_prev: f64,
    pub trace: Vec<TraceEntry>,
    pub path: Option<Vec<Vec<f64>>>,
}

impl<'a, O: SmoothObjective> Driver<'a, O> {
    pub fn new(prob: &'a LpProblem<O>, cfg: &'a SolverConfig, x0: &DVector<f64>) -> Result<Self> {
        cfg.validate()?;
        prob.check_dim(x0)?;
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("x0 has non-finite entries".into()));
        }
        let grad = prob.objective().gradient(x0);
        Ok(Self {
            prob,
            cfg,
            x: x0.clone(),
            grad,
            prev: None,
            l_prev: 1.0,
            trace: Vec::new(),
            path: cfg.record_path.then(|| vec![x0.as_slice().to_vec()]),
        })
    }

    pub fn residual(&self) -> f64 {
        residual_with_gradient(self.prob.lambda(), self.prob.p(), &self.x, &self.grad)
    }

    pub fn converged(&self) -> bool {
        self.residual() <= self.cfg.termination_tol
    }

    /// Default accuracy for exact subproblems, never looser than `cap` and
    /// tied to the termination tolerance so the outer test stays reachable.
    pub fn exact_tol(&self, cap: f64) -> f64 {
        cap.min(1e-8).min(0.1 * self.cfg.termination_tol).max(SUBPROBLEM_TOL_FLOOR)
    }

    /// `L^0_k`: 1 on the first step, BB afterwards.
    pub fn initial_l(&self) -> f64 {
        match &self.prev {
            Some((xp, gp)) => bb_initial_l(&(&self.x - xp), &(&self.grad - gp), self.l_prev, &self.cfg.prox),
            None => self.cfg.prox.clamp(1.0),
        }
    }

    pub fn record(&mut self, phase: usize, merit: f64, step_norm: f64, l_final: Option<f64>, inner_count: usize, max_backtracks: usize) {
        let entry = TraceEntry {
            iter: self.trace.len(),
            phase,
            objective: self.prob.value_unchecked(&self.x),
            merit,
            residual: self.residual(),
            step_norm,
            support_size: self.x.iter().filter(|v| **v != 0.0).count(),
            l_final,
            inner_count,
            max_backtracks,
        };
        self.trace.push(entry);
    }

    /// Moves to `x_new`, refreshing the gradient and BB memory.
    pub fn advance(&mut self, x_new: DVector<f64>, l_accepted: Option<f64>) -> f64 {
        let step = (&x_new - &self.x).norm();
        let g_new = self.prob.objective().gradient(&x_new);
        let old_x = std::mem::replace(&mut self.x, x_new);
        let old_g = std::mem::replace(&mut self.grad, g_new);
        self.prev = Some((old_x, old_g));
        if let Some(l) = l_accepted {
            self.l_prev = l;
        }
        if let Some(path) = &mut self.path {
            path.push(self.x.as_slice().to_vec());
        }
        step
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        self,
        x0: &DVector<f64>,
        status: Status,
        message: Option<String>,
        fixed_eps: Option<f64>,
        bound_eps: f64,
        eps_descent_holds: Option<bool>,
    ) -> Result<SolverRun> {
        let prob = self.prob;
        let status = if status == Status::MaxIterations && self.converged() {
            Status::Converged
        } else {
            status
        };
        let f_x0 = prob.value_unchecked(x0);
        let report = StationarityReport::build(prob, &self.x, f_x0, bound_eps).ok();
        Ok(SolverRun {
            method: self.cfg.method,
            alpha: self.cfg.effective_alpha(),
            lambda: prob.lambda(),
            p: prob.p(),
            n: prob.dim(),
            lipschitz: prob.objective().lipschitz(),
            prox: self.cfg.prox,
            termination_tol: self.cfg.termination_tol,
            fixed_eps,
            f_x0,
            bound_eps,
            eps_descent_holds,
            trace: self.trace,
            x0: x0.as_slice().to_vec(),
            final_x: self.x.as_slice().to_vec(),
            status,
            message,
            report,
            path: self.path,
        })
    }
}

pub(crate) struct StepResult {
    pub x: DVector<f64>,
    pub l: Option<f64>,
    pub inner: usize,
    pub max_backtracks: usize,
}

impl<'a, O: SmoothObjective> Driver<'a, O> {
    /// One reweighted step with folded weights `w`. Prox modes take a single
    /// backtracked linearized step tested with `gap`; exact modes solve the
    /// weighted subproblem to `exact_tol` starting from the current iterate.
    pub fn step<G>(&self, w: &DVector<f64>, alpha: Alpha, exact_tol: f64, gap: G) -> Result<StepResult>
    where
        G: FnMut(&DVector<f64>) -> f64,
    {
        let obj = self.prob.objective();
        if self.cfg.method.is_prox() {
            let (x, g) = (&self.x, &self.grad);
            let out = line_search_step(
                gap,
                |l| match alpha {
                    Alpha::One => prox_l1_unchecked(x, g, l, w),
                    Alpha::Two => prox_l2_unchecked(x, g, l, w),
                },
                x,
                self.initial_l(),
                &self.cfg.prox,
                obj.lipschitz(),
            )?;
            Ok(StepResult {
                x: out.x,
                l: Some(out.l),
                inner: out.inner_count,
                max_backtracks: out.inner_count,
            })
        } else {
            let tol = self.cfg.subproblem_tol.unwrap_or(exact_tol);
            let sol = match alpha {
                Alpha::One => weighted_l1_solve(obj, w, tol, &self.x, &self.cfg.prox)?,
                Alpha::Two => weighted_l2_solve(obj, w, tol, &self.x, &self.cfg.prox)?,
            };
            Ok(StepResult {
                x: sol.x,
                l: None,
                inner: sol.prox_steps,
                max_backtracks: sol.max_backtracks,
            })
        }
    }
}

/// `f(x) - f(y) + lambda sum_i diff(i, x_i, y_i)`, where `diff` is the drop
/// of the coordinate penalty. Summing per coordinate keeps the decrease
/// between nearby points from being lost to cancellation.
pub(crate) fn merit_gap<O, D>(obj: &O, lambda: f64, x: &DVector<f64>, y: &DVector<f64>, diff: D) -> f64
where
    O: SmoothObjective,
    D: Fn(usize, f64, f64) -> f64,
{
    let reg: f64 = x.iter().zip(y.iter()).enumerate().map(|(i, (&a, &b))| diff(i, a, b)).sum();
    obj.decrease(x, y) + lambda * reg
}

/// `(|a|^alpha + ea)^(p/alpha) - (|b|^alpha + eb)^(p/alpha)`.
#[inline]
pub(crate) fn smoothed_diff(a: f64, ea: f64, b: f64, eb: f64, p: f64, alpha: Alpha) -> f64 {
    match alpha {
        Alpha::One => pow_shift(b.abs() + eb, (a.abs() - b.abs()) + (ea - eb), p),
        Alpha::Two => pow_shift(b * b + eb, (a - b) * (a + b) + (ea - eb), 0.5 * p),
    }
}
