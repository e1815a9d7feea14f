//! Stationarity residuals and lower bounds on nonzero entries.
//!
//! A point is first-order stationary when `X grad f(x) + lambda p |x|^p = 0` with
//! `X = Diag(x)`; second-order stationary when, restricted to the support `B`,
//! `hess_BB f(x) + lambda p (p - 1) Diag(|x_B|^(p-2))` is positive semidefinite.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{LpProblem, SmoothObjective};

/// Smallest eigenvalue accepted as "nonnegative" in [`second_order_check`].
pub const PSD_TOL: f64 = -1e-8;
/// Largest `|H - H^T|` entry accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `||X grad f(x) + lambda p |x|^p||_inf` given a precomputed gradient.
pub fn residual_with_gradient(lambda: f64, p: f64, x: &DVector<f64>, grad: &DVector<f64>) -> f64 {
    x.iter()
        .zip(grad.iter())
        .map(|(&xi, &gi)| (xi * gi + lambda * p * xi.abs().powf(p)).abs())
        .fold(0.0, f64::max)
}

/// `||X grad f(x) + lambda p |x|^p||_inf`; zero exactly at first-order
/// stationary points.
pub fn first_order_residual<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>) -> Result<f64> {
    prob.check_dim(x)?;
    let g = prob.objective().gradient(x);
    Ok(residual_with_gradient(prob.lambda(), prob.p(), x, &g))
}

/// Indices of exactly-nonzero entries.
pub fn support(x: &DVector<f64>) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

/// Second-order test on the support given the support block of the Hessian.
pub fn second_order_check_block(lambda: f64, p: f64, x_support: &[f64], block: &DMatrix<f64>) -> Result<bool> {
    let k = x_support.len();
    if block.nrows() != k || block.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: block.nrows(),
        });
    }
    if k == 0 {
        return Ok(true);
    }
    let mut m = block.clone();
    for (i, xi) in x_support.iter().enumerate() {
        m[(i, i)] += lambda * p * (p - 1.0) * xi.abs().powf(p - 2.0);
    }
    // symmetrize against rounding before the eigen solve
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min >= PSD_TOL)
}

/// Second-order stationarity with a caller-supplied full Hessian.
pub fn second_order_check<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>, hessian: &DMatrix<f64>) -> Result<bool> {
    prob.check_dim(x)?;
    let n = x.len();
    if hessian.nrows() != n || hessian.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: hessian.nrows(),
        });
    }
    let asym = (hessian - hessian.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::InvalidInput(format!("hessian is not symmetric (max |H - H^T| = {asym:e})")));
    }
    let b = support(x);
    let block = DMatrix::from_fn(b.len(), b.len(), |i, j| hessian[(b[i], b[j])]);
    let xb: Vec<f64> = b.iter().map(|&i| x[i]).collect();
    second_order_check_block(prob.lambda(), prob.p(), &xb, &block)
}

/// Lower bound on `|x_i|`, `i` in the support, for any first-order stationary
/// point with `F(x) <= F(x0) + eps`:
/// `(lambda p / sqrt(2 L_f (F(x0) + eps - f_low)))^(1/(1-p))`.
pub fn lower_bound_first_parts(lambda: f64, p: f64, lipschitz: f64, f_x0: f64, eps: f64, f_low: f64) -> Result<f64> {
    if eps < 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    let slack = f_x0 + eps - f_low;
    if slack < 0.0 {
        return Err(Error::InvalidInput(format!("F(x0) + eps = {} lies below f_low = {f_low}", f_x0 + eps)));
    }
    if lipschitz == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((lambda * p / (2.0 * lipschitz * slack).sqrt()).powf(1.0 / (1.0 - p)))
}

pub fn lower_bound_first<O: SmoothObjective>(prob: &LpProblem<O>, f_x0: f64, eps: f64) -> Result<f64> {
    let obj = prob.objective();
    lower_bound_first_parts(prob.lambda(), prob.p(), obj.lipschitz(), f_x0, eps, obj.lower_bound())
}

/// `(lambda p (1-p) / L_f)^(1/(2-p))`, the bound for second-order stationary points.
pub fn lower_bound_second_parts(lambda: f64, p: f64, lipschitz: f64) -> f64 {
    if lipschitz == 0.0 {
        return f64::INFINITY;
    }
    (lambda * p * (1.0 - p) / lipschitz).powf(1.0 / (2.0 - p))
}

pub fn lower_bound_second<O: SmoothObjective>(prob: &LpProblem<O>) -> f64 {
    lower_bound_second_parts(prob.lambda(), prob.p(), prob.objective().lipschitz())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub residual_inf: f64,
    pub support: Vec<usize>,
    pub min_abs_on_support: Option<f64>,
    pub first_order_bound: f64,
    pub second_order_bound: f64,
    pub second_order_psd: Option<bool>,
}

impl StationarityReport {
    /// Builds the report; `f_x0` and `eps` parametrize the first-order bound.
    pub fn build<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>, f_x0: f64, eps: f64) -> Result<Self> {
        let residual_inf = first_order_residual(prob, x)?;
        let support = support(x);
        let min_abs_on_support = support.iter().map(|&i| x[i].abs()).reduce(f64::min);
        let first_order_bound = lower_bound_first(prob, f_x0, eps)?;
        let second_order_bound = lower_bound_second(prob);
        let second_order_psd = match prob.objective().hessian_block(x, &support) {
            Some(block) => {
                let xb: Vec<f64> = support.iter().map(|&i| x[i]).collect();
                Some(second_order_check_block(prob.lambda(), prob.p(), &xb, &block)?)
            }
            None => None,
        };
        Ok(Self {
            residual_inf,
            support,
            min_abs_on_support,
            first_order_bound,
            second_order_bound,
            second_order_psd,
        })
    }

    /// Every nonzero entry is at least `slack * first_order_bound`.
    pub fn satisfies_first_bound(&self, slack: f64) -> bool {
        self.min_abs_on_support.is_none_or(|m| m >= slack * self.first_order_bound)
    }
}
