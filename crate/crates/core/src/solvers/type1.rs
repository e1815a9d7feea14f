use nalgebra::DVector;

use super::{merit_gap, perturbed_residual, smoothed_diff, smoothed_value_unchecked, Driver, Family, SolverConfig, SolverRun, Status, STALLED};
use crate::error::{Error, Result};
use crate::problem::{LpProblem, SmoothObjective};
use crate::subproblems::weights_type12;

/// First-type IRL-alpha: for each phase `k`, reweighted steps on
/// `Fbar_{alpha,eps^k}` until the perturbed residual is at most `delta_k`.
///
/// The run stops as soon as the unperturbed residual meets `termination_tol`,
/// checked before every step.
pub fn solve_type1<O: SmoothObjective>(prob: &LpProblem<O>, cfg: &SolverConfig, x0: &DVector<f64>) -> Result<SolverRun> {
    if cfg.method.family() != Family::Type1 {
        return Err(Error::Configuration(format!("{} is not a type-1 method", cfg.method)));
    }
    let mut d = Driver::new(prob, cfg, x0)?;
    let (n, lambda, p) = (prob.dim(), prob.lambda(), prob.p());
    let alpha = cfg.alpha;
    let obj = prob.objective();

    let eps0 = cfg.eps_schedule.vector(0, n);
    let bound_eps = smoothed_value_unchecked(prob, x0, &eps0, alpha) - prob.value_unchecked(x0);
    d.record(0, smoothed_value_unchecked(prob, x0, &eps0, alpha), 0.0, None, 0, 0);

    let mut status = Status::MaxIterations;
    let mut message = None;
    'phases: for k in 0..cfg.max_outer {
        let eps = cfg.eps_schedule.vector(k, n);
        let delta = cfg.delta_schedule.at(k);
        let exact_tol = d.exact_tol(0.01 * delta);
        let diff = |i: usize, a: f64, b: f64| smoothed_diff(a, eps[i], b, eps[i], p, alpha);
        let mut steps = 0;
        loop {
            if d.converged() {
                status = Status::Converged;
                break 'phases;
            }
            if perturbed_residual(lambda, p, alpha, &d.x, &d.grad, &eps) <= delta {
                break;
            }
            if steps >= cfg.max_inner_per_phase {
                status = Status::Error;
                message = Some(format!("phase {k}: perturbed residual above {delta:e} after {steps} steps"));
                break 'phases;
            }
            let w = match weights_type12(&d.x, &eps, p, alpha) {
                Ok(w) => w.folded(lambda, p),
                Err(e) => {
                    status = Status::Error;
                    message = Some(e.to_string());
                    break 'phases;
                }
            };
            let x = d.x.clone();
            let res = d.step(&w, alpha, exact_tol, |y| merit_gap(obj, lambda, &x, y, diff));
            match res {
                Ok(r) => {
                    if r.x == d.x {
                        // same weights next time, so nothing would change
                        status = Status::MaxIterations;
                        message = Some(STALLED.to_string());
                        break 'phases;
                    }
                    let step = d.advance(r.x, r.l);
                    let merit = smoothed_value_unchecked(prob, &d.x, &eps, alpha);
                    d.record(k, merit, step, r.l, r.inner, r.max_backtracks);
                }
                Err(e) => {
                    status = Status::Error;
                    message = Some(e.to_string());
                    break 'phases;
                }
            }
            steps += 1;
        }
    }
    d.finish(x0, status, message, None, bound_eps, None)
}
