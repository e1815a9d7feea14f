//! Problem model: the smooth part `f`, its least-squares specialization and the
//! lp-regularized bundle `F(x) = f(x) + lambda * ||x||_p^p`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Multiplier applied to the power-iteration estimate of `sigma_max(A)^2` so
/// that the stored constant is an upper bound.
pub const LIPSCHITZ_SAFETY: f64 = 1.000001;
/// Power-iteration budget used when certifying `L_f` for least squares.
pub const LIPSCHITZ_ITERS: usize = 500;
/// Relative tolerance of the power iteration.
pub const LIPSCHITZ_TOL: f64 = 1e-8;

/// Oracle for the smooth term `f`.
pub trait SmoothObjective {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Lipschitz constant of the gradient (must be an upper bound).
    fn lipschitz(&self) -> f64;

    /// A valid lower bound on `inf f`.
    fn lower_bound(&self) -> f64;

    /// `f(x) - f(y)`. Implementations may override this with a form that avoids
    /// cancellation when `x` and `y` are close.
    fn decrease(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.value(x) - self.value(y)
    }

    /// Hessian at `x`, when available.
    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    /// Rows and columns `support` of the Hessian at `x`.
    fn hessian_block(&self, x: &DVector<f64>, support: &[usize]) -> Option<DMatrix<f64>> {
        let h = self.hessian(x)?;
        let k = support.len();
        Some(DMatrix::from_fn(k, k, |i, j| h[(support[i], support[j])]))
    }

    fn as_least_squares(&self) -> Option<&LeastSquares> {
        None
    }
}

/// Result of [`estimate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// Raw Rayleigh quotient estimate of `sigma_max(A)^2`.
    pub raw: f64,
    /// `raw * LIPSCHITZ_SAFETY`, the value used as `L_f`.
    pub value: f64,
    pub iterations: usize,
    /// `false` when the residual test did not pass within the budget; `value`
    /// is then the best estimate seen and may be less accurate.
    pub converged: bool,
    /// Set when [`certify_lipschitz`] replaced an unconverged power iteration
    /// by a dense eigenvalue solve.
    pub dense: bool,
}

/// Estimates `sigma_max(A)^2` by power iteration on `A^T A`.
///
/// Stops once `||A^T A v - mu v|| <= tol * mu` for the unit iterate `v` and
/// Rayleigh quotient `mu = ||A v||^2`.
pub fn estimate_lipschitz(a: &DMatrix<f64>, iters: usize, tol: f64) -> LipschitzEstimate {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 || a.iter().all(|&v| v == 0.0) {
        return LipschitzEstimate {
            raw: 0.0,
            value: 0.0,
            iterations: 0,
            converged: true,
            dense: false,
        };
    }
    // Irregular deterministic start, generically not orthogonal to the top
    // eigenvector.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7548776662 + 0.3).sin());
    v /= v.norm();

    let mut best = 0.0_f64;
    let mut converged = false;
    let mut done = 0;
    for it in 1..=iters.max(1) {
        done = it;
        let av = a * &v;
        let mu = av.norm_squared();
        best = best.max(mu);
        let w = a.tr_mul(&av);
        let wn = w.norm();
        if wn == 0.0 {
            // v fell into the null space; A is nonzero so this only happens for
            // adversarial starts.
            break;
        }
        let resid = (&w - &v * mu).norm();
        if resid <= tol * mu {
            converged = true;
            break;
        }
        v = w / wn;
    }
    LipschitzEstimate {
        raw: best,
        value: best * LIPSCHITZ_SAFETY,
        iterations: done,
        converged,
        dense: false,
    }
}

/// Power iteration, falling back to a dense symmetric eigensolve of the
/// smaller Gram matrix (`A A^T` or `A^T A`) when it does not converge, which
/// happens when the top two singular values are close.
pub fn certify_lipschitz(a: &DMatrix<f64>) -> LipschitzEstimate {
    let est = estimate_lipschitz(a, LIPSCHITZ_ITERS, LIPSCHITZ_TOL);
    if est.converged {
        return est;
    }
    let gram = if a.nrows() <= a.ncols() { a * a.transpose() } else { a.tr_mul(a) };
    let top = SymmetricEigen::new(gram).eigenvalues.max().max(est.raw);
    LipschitzEstimate {
        raw: top,
        value: top * LIPSCHITZ_SAFETY,
        iterations: est.iterations,
        converged: false,
        dense: true,
    }
}

/// `f(x) = 1/2 ||A x - b||^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
    lipschitz: f64,
    estimate: Option<LipschitzEstimate>,
}

impl LeastSquares {
    /// Builds the objective and certifies `L_f` (see [`certify_lipschitz`]).
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in A or b".into()));
        }
        let est = certify_lipschitz(&a);
        Ok(Self {
            a,
            b,
            lipschitz: est.value,
            estimate: Some(est),
        })
    }

    /// Builds the objective with a caller-supplied Lipschitz constant.
    pub fn with_lipschitz(a: DMatrix<f64>, b: DVector<f64>, lipschitz: f64) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidParameter(format!("lipschitz = {lipschitz}")));
        }
        Ok(Self {
            a,
            b,
            lipschitz,
            estimate: None,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn lipschitz_estimate(&self) -> Option<&LipschitzEstimate> {
        self.estimate.as_ref()
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }
}

impl SmoothObjective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&self.residual(x))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn lower_bound(&self) -> f64 {
        0.0
    }

    // f(x) - f(y) = -(r^T A d + 1/2 ||A d||^2) with r = A x - b, d = y - x.
    fn decrease(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let r = self.residual(x);
        let ad = &self.a * (y - x);
        -(r.dot(&ad) + 0.5 * ad.norm_squared())
    }

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(self.a.tr_mul(&self.a))
    }

    fn hessian_block(&self, _x: &DVector<f64>, support: &[usize]) -> Option<DMatrix<f64>> {
        let cols = self.a.select_columns(support.iter());
        Some(cols.tr_mul(&cols))
    }

    fn as_least_squares(&self) -> Option<&LeastSquares> {
        Some(self)
    }
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`, negative for `p` in `(0, 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")))
    }
}

/// `sum_i |x_i|^p`, the p-th power of the lp quasi-norm.
pub fn lp_norm_p(x: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry {v}")));
    }
    Ok(penalty_unchecked(x, p))
}

pub(crate) fn penalty_unchecked(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum()
}

/// `(b + d)^p - b^p` for `b, b + d >= 0`, accurate for small `d` relative to
/// `b`. Callers pass `d` computed exactly (or nearly) instead of subtracting
/// two rounded bases.
pub(crate) fn pow_shift(b: f64, d: f64, p: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else if b > 0.0 && d.abs() < b {
        b.powf(p) * (p * (d / b).ln_1p()).exp_m1()
    } else {
        (b + d).max(0.0).powf(p) - b.powf(p)
    }
}

/// `a^p - b^p` for `a, b >= 0`.
pub(crate) fn pow_diff(a: f64, b: f64, p: f64) -> f64 {
    pow_shift(b, a - b, p)
}

/// `F(x) = f(x) + lambda * ||x||_p^p` together with its parameters.
#[derive(Debug, Clone)]
pub struct LpProblem<O> {
    objective: O,
    lambda: f64,
    p: f64,
    q: f64,
}

impl<O: SmoothObjective> LpProblem<O> {
    pub fn new(objective: O, lambda: f64, p: f64) -> Result<Self> {
        check_p(p)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(Self {
            objective,
            lambda,
            p,
            q: conjugate_exponent(p),
        })
    }

    pub fn objective(&self) -> &O {
        &self.objective
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub(crate) fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `F(x)`.
    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.objective.value(x) + self.lambda * lp_norm_p(x.as_slice(), self.p)?)
    }

    pub(crate) fn value_unchecked(&self, x: &DVector<f64>) -> f64 {
        self.objective.value(x) + self.lambda * penalty_unchecked(x.as_slice(), self.p)
    }
}

/// Free-function form of [`LpProblem::value`].
pub fn objective_value<O: SmoothObjective>(prob: &LpProblem<O>, x: &DVector<f64>) -> Result<f64> {
    prob.value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm_p(&[0.0, 0.0, 0.0], 0.5).unwrap(), 0.0);
        assert_eq!(lp_norm_p(&[1.0, -1.0], 0.5).unwrap(), 2.0);
        assert_eq!(lp_norm_p(&[4.0], 0.5).unwrap(), 2.0);
        assert!(matches!(lp_norm_p(&[f64::NAN], 0.5), Err(Error::InvalidInput(_))));
        assert!(lp_norm_p(&[1.0], 1.0).is_err());
    }

    #[test]
    fn objective_examples() {
        let eye = LeastSquares::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let prob = LpProblem::new(eye, 1.0, 0.5).unwrap();
        assert_eq!(prob.value(&DVector::zeros(2)).unwrap(), 0.0);
        assert_eq!(prob.value(&DVector::from_vec(vec![1.0, 1.0])).unwrap(), 3.0);

        let row = LeastSquares::new(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), DVector::from_vec(vec![1.0])).unwrap();
        let prob = LpProblem::new(row, 0.1, 0.5).unwrap();
        assert_relative_eq!(prob.value(&DVector::from_vec(vec![1.0, 0.0])).unwrap(), 0.1, epsilon = 1e-15);
        assert!(matches!(
            prob.value(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn conjugate_exponent_identity() {
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let q = conjugate_exponent(p);
            assert!(q < 0.0);
            assert!((1.0 / p + 1.0 / q - 1.0).abs() <= 1e-14, "p = {p}");
        }
    }

    #[test]
    fn lipschitz_diag_and_zero() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 4.0]));
        let est = estimate_lipschitz(&a, LIPSCHITZ_ITERS, LIPSCHITZ_TOL);
        assert!(est.converged);
        assert!(est.value >= 16.0);
        assert_relative_eq!(est.value, 16.0, max_relative = 1e-6 + 1e-12);

        let z = DMatrix::<f64>::zeros(1, 1);
        assert_eq!(estimate_lipschitz(&z, 10, 1e-8).value, 0.0);
    }

    #[test]
    fn least_squares_decrease_matches_value_difference() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, -2.0]);
        let ls = LeastSquares::new(a, b).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        let y = DVector::from_vec(vec![-0.1, 0.4, 0.2]);
        assert_relative_eq!(ls.decrease(&x, &y), ls.value(&x) - ls.value(&y), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let ls = LeastSquares::new(DMatrix::identity(1, 1), DVector::zeros(1)).unwrap();
        assert!(LpProblem::new(ls.clone(), 0.0, 0.5).is_err());
        assert!(LpProblem::new(ls.clone(), 1.0, 0.0).is_err());
        assert!(LeastSquares::new(DMatrix::identity(2, 2), DVector::zeros(3)).is_err());
    }

    #[test]
    fn pow_diff_matches_direct_and_keeps_precision() {
        for &(a, b, p) in &[(2.0, 1.0, 0.5), (0.3, 0.7, 0.1), (0.0, 0.5, 0.5), (1.5, 0.0, 0.9)] {
            let d: f64 = f64::powf(a, p) - f64::powf(b, p);
            assert!((pow_diff(a, b, p) - d).abs() < 1e-15, "{a} {b}");
        }
        // a + h is exact here, so the first-order term decides the answer
        let (a, h, p) = (0.5, 2f64.powi(-40), 0.5);
        let exact = p * f64::powf(a, p - 1.0) * h;
        assert!((pow_diff(a + h, a, p) - exact).abs() < 1e-9 * exact);
        assert!((pow_shift(a, h, p) - exact).abs() < 1e-9 * exact);
        let naive = f64::powf(a + h, p) - f64::powf(a, p);
        assert!((naive - exact).abs() > 1e-6 * exact);
    }
}
