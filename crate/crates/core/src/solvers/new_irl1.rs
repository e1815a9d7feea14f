use nalgebra::DVector;

use super::{merit_gap, Driver, Family, SolverConfig, SolverRun, Status, STALLED};
use crate::approx::{eps_threshold, satisfies_threshold, EpsApprox};
use crate::error::{Error, Result};
use crate::problem::{LpProblem, SmoothObjective};
use crate::subproblems::weights_new_irl1;

/// Fixed-eps IRL1 on `F_eps` with weights `s_i = min(u_eps, |x_i|^(1/(q-1)))`.
///
/// `eps` is taken from `cfg.fixed_eps` or, when absent, from
/// [`eps_threshold`]; either way it must satisfy the threshold inequality at
/// `x0`, which makes limit points first-order stationary for `F` itself.
pub fn solve_new_irl1<O: SmoothObjective>(prob: &LpProblem<O>, cfg: &SolverConfig, x0: &DVector<f64>) -> Result<SolverRun> {
    if cfg.method.family() != Family::NewIrl1 {
        return Err(Error::Configuration(format!("{} is not a new-IRL1 method", cfg.method)));
    }
    let mut d = Driver::new(prob, cfg, x0)?;
    let eps = match cfg.fixed_eps {
        Some(e) => e,
        None => eps_threshold(prob, x0, cfg.eps_threshold_tol)?,
    };
    if !satisfies_threshold(prob, x0, eps)? {
        return Err(Error::Configuration(format!(
            "eps = {eps:e} violates the stationarity threshold at x0"
        )));
    }
    let approx = EpsApprox::new(prob, eps)?;
    let (lambda, p, q) = (prob.lambda(), prob.p(), prob.q());
    let obj = prob.objective();
    let diff = |_: usize, a: f64, b: f64| approx.h_diff(a, b);

    let exact_tol = d.exact_tol(1e-8);
    let merit0 = obj.value(x0) + lambda * approx.penalty(x0);
    d.record(0, merit0, 0.0, None, 0, 0);

    let mut status = Status::MaxIterations;
    let mut message = None;
    for _ in 0..cfg.max_outer {
        if d.converged() {
            status = Status::Converged;
            break;
        }
        let w = weights_new_irl1(&d.x, approx.u_eps, q).folded(lambda, p);
        let x = d.x.clone();
        match d.step(&w, crate::subproblems::Alpha::One, exact_tol, |y| merit_gap(obj, lambda, &x, y, diff)) {
            Ok(r) if r.x == d.x => {
                message = Some(STALLED.to_string());
                break;
            }
            Ok(r) => {
                let step = d.advance(r.x, r.l);
                let merit = obj.value(&d.x) + lambda * approx.penalty(&d.x);
                d.record(0, merit, step, r.l, r.inner, r.max_backtracks);
            }
            Err(e) => {
                status = Status::Error;
                message = Some(e.to_string());
                break;
            }
        }
    }
    let final_merit = d.trace.last().map(|e| e.merit).unwrap_or(merit0);
    let descent = Some(final_merit <= merit0);
    d.finish(x0, status, message, Some(eps), eps, descent)
}
