//! Browser bindings for the static page in `www/`. Every export takes plain
//! numbers and returns a JSON string, `{"error": ...}` on bad input, so the
//! same functions run natively under `cargo test`.

use lpirl_core::approx::{h_u, EpsApprox};
use lpirl_core::problem::conjugate_exponent;
use lpirl_core::solvers::{solve, Method, SolverConfig};
use lpirl_core::stationarity::{lower_bound_first, lower_bound_second};
use lpirl_core::subproblems::Alpha;
use lpirl_core::{DMatrix, DVector, LeastSquares, LpProblem, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    t: Vec<f64>,
    h: Vec<f64>,
    abs_p: Vec<f64>,
    knee: f64,
    gap_bound: f64,
}

#[derive(Serialize)]
struct Landscape {
    t: Vec<f64>,
    f: Vec<f64>,
    f_eps: Vec<f64>,
    stationary: Vec<f64>,
    lower_bound_first: f64,
    lower_bound_second: f64,
}

#[derive(Serialize)]
struct Trajectory {
    method: String,
    status: String,
    path: Vec<Vec<f64>>,
    objective: Vec<f64>,
    final_x: Vec<f64>,
    residual: f64,
}

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2) - 1;
    (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
}

fn curve(p: f64, knee: f64, t_max: f64, samples: usize) -> Result<Curve> {
    let q = conjugate_exponent(p);
    let u = knee.powf(1.0 / (q - 1.0));
    let t = grid(-t_max, t_max, samples);
    let h = t.iter().map(|&x| h_u(x, u, p, q)).collect::<Result<_>>()?;
    let abs_p = t.iter().map(|x| x.abs().powf(p)).collect();
    Ok(Curve { t, h, abs_p, knee, gap_bound: u.powf(q) })
}

/// `h_u` next to `|t|^p` on `[-t_max, t_max]`, with `u` set by its knee.
#[wasm_bindgen]
pub fn h_u_curve(p: f64, knee: f64, t_max: f64, samples: usize) -> String {
    to_json(curve(p, knee, t_max, samples))
}

// Sign changes of a t^2 - a b + lambda p |t|^p / t on a log grid, bisected.
fn scalar_roots(a: f64, b: f64, lambda: f64, p: f64) -> Vec<f64> {
    let phi = |t: f64| a * a * t - a * b + lambda * p * t.abs().powf(p - 1.0) * t.signum();
    let r = 10.0 * (1.0 + (a * b).abs() / (a * a).max(1e-12));
    let k = 4000;
    let mut out = vec![0.0];
    for sign in [-1.0, 1.0] {
        let at = |i: usize| sign * (1e-12f64.ln() + (r.ln() - 1e-12f64.ln()) * i as f64 / k as f64).exp();
        for i in 0..k {
            let (mut lo, mut hi) = (at(i), at(i + 1));
            if phi(lo).signum() == phi(hi).signum() {
                continue;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if phi(mid).signum() == phi(lo).signum() {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn landscape(a: f64, b: f64, lambda: f64, p: f64, eps: f64, t_max: f64, samples: usize) -> Result<Landscape> {
    let ls = LeastSquares::new(DMatrix::from_element(1, 1, a), DVector::from_element(1, b))?;
    let prob = LpProblem::new(ls, lambda, p)?;
    let approx = EpsApprox::new(&prob, eps)?;
    let t = grid(-t_max, t_max, samples);
    let mut f = Vec::with_capacity(t.len());
    let mut f_eps = Vec::with_capacity(t.len());
    for &x in &t {
        let x = DVector::from_element(1, x);
        f.push(prob.value(&x)?);
        f_eps.push(approx.value(&prob, &x)?);
    }
    // bound for stationary points no worse than the origin
    let f0 = prob.value(&DVector::zeros(1))?;
    Ok(Landscape {
        t,
        f,
        f_eps,
        stationary: scalar_roots(a, b, lambda, p),
        lower_bound_first: lower_bound_first(&prob, f0, 0.0)?,
        lower_bound_second: lower_bound_second(&prob),
    })
}

/// `F` and `F_eps` for `f(x) = (a x - b)^2 / 2`, plus the stationary points
/// and both lower bounds on nonzero stationary entries.
#[wasm_bindgen]
pub fn landscape_1d(a: f64, b: f64, lambda: f64, p: f64, eps: f64, t_max: f64, samples: usize) -> String {
    to_json(landscape(a, b, lambda, p, eps, t_max, samples))
}

#[allow(clippy::too_many_arguments)]
fn trajectory(a: [f64; 4], b: [f64; 2], lambda: f64, p: f64, method: &str, alpha: u32, x0: [f64; 2]) -> Result<Trajectory> {
    let method: Method = method.parse()?;
    let ls = LeastSquares::new(DMatrix::from_row_slice(2, 2, &a), DVector::from_column_slice(&b))?;
    let prob = LpProblem::new(ls, lambda, p)?;
    let cfg = SolverConfig::new(method).with_alpha(Alpha::from_int(alpha)?).with_tol(1e-8).with_path();
    let run = solve(&prob, &cfg, &DVector::from_column_slice(&x0))?;
    Ok(Trajectory {
        method: method.to_string(),
        status: format!("{:?}", run.status),
        objective: run.trace.iter().map(|e| e.objective).collect(),
        residual: run.final_residual().unwrap_or(f64::NAN),
        final_x: run.final_x.clone(),
        path: run.path.unwrap_or_default(),
    })
}

/// Iterates of one solver on the 2x2 problem with row-major `A`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn trajectory_2d(a00: f64, a01: f64, a10: f64, a11: f64, b0: f64, b1: f64, lambda: f64, p: f64, method: &str, alpha: u32, x0: f64, x1: f64) -> String {
    to_json(trajectory([a00, a01, a10, a11], [b0, b1], lambda, p, method, alpha, [x0, x1]))
}

/// `F` on a `cells x cells` grid over `[-r, r]^2`, row by row (x1 fixed per row).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn objective_grid_2d(a00: f64, a01: f64, a10: f64, a11: f64, b0: f64, b1: f64, lambda: f64, p: f64, r: f64, cells: usize) -> String {
    let go = || -> Result<Vec<Vec<f64>>> {
        let ls = LeastSquares::new(DMatrix::from_row_slice(2, 2, &[a00, a01, a10, a11]), DVector::from_column_slice(&[b0, b1]))?;
        let prob = LpProblem::new(ls, lambda, p)?;
        let axis = grid(-r, r, cells);
        axis.iter()
            .map(|&x1| axis.iter().map(|&x0| prob.value(&DVector::from_column_slice(&[x0, x1]))).collect())
            .collect()
    };
    to_json(go())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    fn floats(v: &Value) -> Vec<f64> {
        v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    }

    #[test]
    fn curve_sits_above_abs_power_within_gap() {
        let v = parse(&h_u_curve(0.5, 0.5, 2.0, 101));
        let (h, a) = (floats(&v["h"]), floats(&v["abs_p"]));
        let bound = v["gap_bound"].as_f64().unwrap();
        assert_eq!(h.len(), 101);
        for (h, a) in h.iter().zip(&a) {
            assert!(*h >= *a - 1e-12 && *h <= a + bound + 1e-12);
        }
    }

    #[test]
    fn landscape_lists_the_scalar_roots() {
        let v = parse(&landscape_1d(1.0, 1.0, 0.1, 0.5, 1e-3, 2.0, 201));
        let s = floats(&v["stationary"]);
        assert_eq!(s.len(), 3);
        assert!((s[2] - 0.948_665).abs() < 1e-6);
        assert!(v["lower_bound_second"].as_f64().unwrap() < s[2]);
    }

    #[test]
    fn trajectory_starts_at_x0_and_converges() {
        let v = parse(&trajectory_2d(1.0, 0.4, 0.2, 0.8, 1.0, -0.5, 0.1, 0.5, "irl1-3", 1, 0.5, -0.5));
        assert_eq!(v["status"], "Converged");
        let path = v["path"].as_array().unwrap();
        assert_eq!(floats(&path[0]), vec![0.5, -0.5]);
        assert_eq!(floats(path.last().unwrap()), floats(&v["final_x"]));
    }

    #[test]
    fn bad_input_reports_an_error() {
        assert!(parse(&trajectory_2d(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.1, 1.5, "irl1-3", 1, 0.0, 0.0))["error"].is_string());
        assert!(parse(&trajectory_2d(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.1, 0.5, "newton", 1, 0.0, 0.0))["error"].is_string());
        assert!(parse(&h_u_curve(0.5, -1.0, 1.0, 10))["error"].is_string());
    }

    #[test]
    fn grid_has_requested_shape() {
        let v = parse(&objective_grid_2d(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.1, 0.5, 2.0, 20));
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].as_array().unwrap().len(), 20);
    }
}
