//! Invariant checks replayed on a finished [`SolverRun`], either in memory or
//! after loading a trace file.

use serde::{Deserialize, Serialize};

use super::{Family, SolverRun, Status};

/// Relative slack for merit monotonicity: `1e-10 (1 + |value|)`.
pub const MONOTONE_RTOL: f64 = 1e-10;

/// Fraction of the first-order lower bound that nonzero entries must reach.
pub const LOWER_BOUND_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl InvariantCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Runs every invariant that applies to `run`.
pub fn verify_run(run: &SolverRun) -> Vec<InvariantCheck> {
    let mut out = vec![monotone_merit(run), backtrack_cap(run), converged_residual(run)];
    if run.method.family() == Family::NewIrl1 {
        out.push(lower_bound(run));
    }
    out
}

fn monotone_merit(run: &SolverRun) -> InvariantCheck {
    let per_phase = run.method.family() == Family::Type1;
    let mut worst: Option<(usize, f64)> = None;
    for pair in run.trace.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if per_phase && a.phase != b.phase {
            continue;
        }
        let excess = b.merit - a.merit - MONOTONE_RTOL * (1.0 + a.merit.abs());
        let bad = excess > 0.0 || !b.merit.is_finite();
        if bad && worst.is_none_or(|(_, w)| excess > w) {
            worst = Some((b.iter, excess));
        }
    }
    let scope = if per_phase { "within each phase" } else { "over the whole trace" };
    match worst {
        None => InvariantCheck::new("monotone-merit", true, format!("merit non-increasing {scope}")),
        Some((i, e)) => InvariantCheck::new("monotone-merit", false, format!("merit rose by {e:e} beyond slack at iteration {i}")),
    }
}

fn backtrack_cap(run: &SolverRun) -> InvariantCheck {
    let cap = run.prox.inner_iteration_cap(run.lipschitz);
    let got = run.max_backtracks();
    InvariantCheck::new("inner-cap", got <= cap, format!("max line-search trials {got}, ceiling {cap}"))
}

fn converged_residual(run: &SolverRun) -> InvariantCheck {
    let r = run.final_residual().unwrap_or(f64::INFINITY);
    let passed = run.status != Status::Converged || r <= run.termination_tol;
    InvariantCheck::new(
        "converged-residual",
        passed,
        format!("status {:?}, residual {r:e}, tol {:e}", run.status, run.termination_tol),
    )
}

fn lower_bound(run: &SolverRun) -> InvariantCheck {
    let r = run.final_residual().unwrap_or(f64::INFINITY);
    if r > run.termination_tol {
        return InvariantCheck::new("lower-bound", true, format!("skipped: residual {r:e} above tol"));
    }
    let Some(rep) = &run.report else {
        return InvariantCheck::new("lower-bound", false, "no stationarity report".into());
    };
    let need = LOWER_BOUND_FRACTION * rep.first_order_bound;
    match rep.min_abs_on_support {
        None => InvariantCheck::new("lower-bound", true, "empty support".into()),
        Some(m) => InvariantCheck::new("lower-bound", m >= need, format!("min |x_i| on support {m:e}, required {need:e}")),
    }
}
