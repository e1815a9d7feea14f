//! Iterative reweighted l1/l2 minimization for lp-regularized problems
//!
//! ```text
//! min_x  F(x) = f(x) + lambda * sum_i |x_i|^p,      0 < p < 1
//! ```
//!
//! where `f` is smooth with an `L_f`-Lipschitz gradient and bounded below.
//!
//! The crate is split by concern:
//!
//! * [`problem`]: the smooth objective oracle, the least-squares specialization and
//!   the lp-regularized problem bundle.
//! * [`approx`]: the Lipschitz continuous epsilon-approximation `F_eps` of `F` and
//!   the computable threshold on `eps`.
//! * [`stationarity`]: first/second-order stationarity residuals and the lower
//!   bounds on nonzero entries of stationary points.
//! * [`subproblems`]: reweighting rules, closed-form proximal steps, the exact
//!   weighted subproblem solver and the backtracking line search.
//! * [`solvers`]: the reweighted drivers (two classical families plus the
//!   fixed-eps IRL1 method), the lasso warm start and trace verification.

pub mod approx;
pub mod error;
pub mod problem;
pub mod solvers;
pub mod stationarity;
pub mod subproblems;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use problem::{LeastSquares, LpProblem, SmoothObjective};
