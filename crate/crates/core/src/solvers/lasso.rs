use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::SmoothObjective;
use crate::subproblems::{weighted_l1_solve, ProxConfig};

/// Solves `min f(x) + lambda ||x||_1` from the origin to optimality residual
/// `tol`, using proximal gradient with BB-initialized backtracking.
pub fn solve_lasso_warmstart<O: SmoothObjective>(obj: &O, lambda: f64, tol: f64) -> Result<DVector<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    let n = obj.dim();
    let w = DVector::from_element(n, lambda);
    let sol = weighted_l1_solve(obj, &w, tol, &DVector::zeros(n), &ProxConfig::default())?;
    Ok(sol.x)
}
