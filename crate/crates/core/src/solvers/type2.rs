use nalgebra::DVector;

use super::{merit_gap, smoothed_diff, smoothed_value_unchecked, Driver, Family, SolverConfig, SolverRun, Status};
use crate::error::{Error, Result};
use crate::problem::{LpProblem, SmoothObjective};
use crate::subproblems::weights_type12;

/// Second-type IRL-alpha: exactly one reweighted step per `eps^k`.
///
/// Prox mode accepts a step when
/// `Fbar_{alpha,eps^k}(x^k) - Fbar_{alpha,eps^{k+1}}(x^{k+1}) >= c/2 ||x^{k+1} - x^k||^2`.
pub fn solve_type2<O: SmoothObjective>(prob: &LpProblem<O>, cfg: &SolverConfig, x0: &DVector<f64>) -> Result<SolverRun> {
    if cfg.method.family() != Family::Type2 {
        return Err(Error::Configuration(format!("{} is not a type-2 method", cfg.method)));
    }
    let mut d = Driver::new(prob, cfg, x0)?;
    let (n, lambda, p) = (prob.dim(), prob.lambda(), prob.p());
    let alpha = cfg.alpha;
    let obj = prob.objective();

    let eps0 = cfg.eps_schedule.vector(0, n);
    let merit0 = smoothed_value_unchecked(prob, x0, &eps0, alpha);
    let bound_eps = merit0 - prob.value_unchecked(x0);
    d.record(0, merit0, 0.0, None, 0, 0);

    let mut status = Status::MaxIterations;
    let mut message = None;
    for k in 0..cfg.max_outer {
        if d.converged() {
            status = Status::Converged;
            break;
        }
        let eps = cfg.eps_schedule.vector(k, n);
        let eps_next = cfg.eps_schedule.vector(k + 1, n);
        let exact_tol = d.exact_tol(eps.min());
        let result = weights_type12(&d.x, &eps, p, alpha).and_then(|w| {
            let w = w.folded(lambda, p);
            let x = d.x.clone();
            d.step(&w, alpha, exact_tol, |y| {
                merit_gap(obj, lambda, &x, y, |i, a, b| smoothed_diff(a, eps[i], b, eps_next[i], p, alpha))
            })
        });
        match result {
            Ok(r) => {
                let step = d.advance(r.x, r.l);
                let merit = smoothed_value_unchecked(prob, &d.x, &eps_next, alpha);
                d.record(0, merit, step, r.l, r.inner, r.max_backtracks);
            }
            Err(e) => {
                status = Status::Error;
                message = Some(e.to_string());
                break;
            }
        }
    }
    d.finish(x0, status, message, None, bound_eps, None)
}
