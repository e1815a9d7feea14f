//! Lipschitz continuous approximation of `|t|^p` and of `F`.
//!
//! For `u > 0` and `q = p / (p - 1) < 0`,
//!
//! ```text
//! h_u(t) = min_{0 <= s <= u} p (|t| s - s^q / q)
//!        = |t|^p                  if |t| >  u^(q-1)
//!        = p (|t| u - u^q / q)    if |t| <= u^(q-1)
//! ```
//!
//! `h_u` is `p u`-Lipschitz and `0 <= h_u(t) - |t|^p <= u^q`. Summing it over
//! coordinates with `u_eps = (eps / (lambda n))^(1/q)` gives
//! `F_eps = f + lambda * sum_i h_{u_eps}(x_i)` with `F <= F_eps <= F + eps`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{penalty_unchecked, pow_diff, LpProblem, SmoothObjective};

/// Bisection budget for [`eps_threshold`].
pub const THRESHOLD_BISECTIONS: usize = 200;

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("u must be positive and finite, got {u}")))
    }
}

#[inline]
fn h_branch(t: f64, u: f64, p: f64, q: f64, knee: f64) -> f64 {
    let a = t.abs();
    if a > knee {
        a.powf(p)
    } else {
        p * (a * u - u.powf(q) / q)
    }
}

/// `h_u(t)` in closed form.
pub fn h_u(t: f64, u: f64, p: f64, q: f64) -> Result<f64> {
    check_u(u)?;
    Ok(h_branch(t, u, p, q, u.powf(q - 1.0)))
}

/// Closed interval `[lo, hi]`; a singleton when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    /// Distance from `v` to the interval.
    pub fn distance(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }
}

/// Clarke subdifferential of `h_u` at `t`.
pub fn h_u_subdiff(t: f64, u: f64, p: f64, q: f64) -> Result<Interval> {
    check_u(u)?;
    let a = t.abs();
    let knee = u.powf(q - 1.0);
    let mag = if a > knee { p * a.powf(p - 1.0) } else { p * u };
    Ok(match t.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => Interval::point(mag),
        Some(std::cmp::Ordering::Less) => Interval::point(-mag),
        _ => Interval { lo: -mag, hi: mag },
    })
}

/// The eps-approximation attached to a problem of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsApprox {
    pub eps: f64,
    /// `u_eps = (eps / (lambda n))^(1/q)`, the cap on the auxiliary weight.
    pub u_eps: f64,
    /// `u_eps^(q-1)`, where `h_{u_eps}` switches branch.
    pub knee: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
}

impl EpsApprox {
    pub fn new<O: SmoothObjective>(prob: &LpProblem<O>, eps: f64) -> Result<Self> {
        Self::from_parts(eps, prob.lambda(), prob.p(), prob.dim())
    }

    pub fn from_parts(eps: f64, lambda: f64, p: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("empty problem".into()));
        }
        let q = crate::problem::conjugate_exponent(p);
        let u_eps = (eps / (lambda * n as f64)).powf(1.0 / q);
        let knee = u_eps.powf(q - 1.0);
        if !(u_eps > 0.0 && u_eps.is_finite() && knee > 0.0 && knee.is_finite()) {
            return Err(Error::Configuration(format!(
                "eps = {eps:e} gives u_eps = {u_eps:e}, knee = {knee:e}: outside floating-point range"
            )));
        }
        Ok(Self {
            eps,
            u_eps,
            knee,
            lambda,
            p,
            q,
            n,
        })
    }

    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        h_branch(t, self.u_eps, self.p, self.q, self.knee)
    }

    /// `h(a) - h(b)`, accurate when `a` and `b` are close.
    pub fn h_diff(&self, a: f64, b: f64) -> f64 {
        let (sa, sb) = (a.abs(), b.abs());
        let above = |s: f64| s > self.knee;
        match (above(sa), above(sb)) {
            (true, true) => pow_diff(sa, sb, self.p),
            (false, false) => self.p * self.u_eps * (sa - sb),
            (true, false) => pow_diff(sa, self.knee, self.p) + self.p * self.u_eps * (self.knee - sb),
            (false, true) => -(pow_diff(sb, self.knee, self.p) + self.p * self.u_eps * (self.knee - sa)),
        }
    }

    /// `sum_i h_{u_eps}(x_i)`.
    pub fn penalty(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|&t| self.h(t)).sum()
    }

    /// `F_eps(x)`.
    pub fn value<O: SmoothObjective>(&self, prob: &LpProblem<O>, x: &DVector<f64>) -> Result<f64> {
        prob.check_dim(x)?;
        Ok(prob.objective().value(x) + self.lambda * self.penalty(x))
    }

    /// `F_eps(x) - F(x)`, computed coordinate-wise.
    pub fn gap(&self, x: &DVector<f64>) -> f64 {
        self.lambda * (self.penalty(x) - penalty_unchecked(x.as_slice(), self.p))
    }
}

/// Free-function form of [`EpsApprox::value`].
pub fn f_eps<O: SmoothObjective>(approx: &EpsApprox, prob: &LpProblem<O>, x: &DVector<f64>) -> Result<f64> {
    approx.value(prob, x)
}

/// Right-hand side of the threshold condition
/// `eps < psi(eps) = n lambda [ sqrt(2 L_f (F(x0) + eps - f_low)) / (lambda p) ]^q`.
pub fn threshold_rhs(n: usize, lambda: f64, p: f64, lipschitz: f64, f_x0: f64, f_low: f64, eps: f64) -> f64 {
    let q = crate::problem::conjugate_exponent(p);
    let g = (2.0 * lipschitz * (f_x0 + eps - f_low)).sqrt();
    n as f64 * lambda * (g / (lambda * p)).powf(q)
}

/// `true` when `eps` satisfies the strict threshold inequality for `x0`.
pub fn satisfies_threshold<O: SmoothObjective>(prob: &LpProblem<O>, x0: &DVector<f64>, eps: f64) -> Result<bool> {
    let f_x0 = prob.value(x0)?;
    let obj = prob.objective();
    Ok(eps > 0.0
        && eps < threshold_rhs(prob.dim(), prob.lambda(), prob.p(), obj.lipschitz(), f_x0, obj.lower_bound(), eps))
}

/// Largest admissible `eps` for the fixed-eps method, less `tol`.
///
/// `psi` is strictly decreasing, so the supremum of admissible values is the
/// unique root of `eps = psi(eps)` on `[0, psi(0)]`.
pub fn eps_threshold<O: SmoothObjective>(prob: &LpProblem<O>, x0: &DVector<f64>, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let f_x0 = prob.value(x0)?;
    if !f_x0.is_finite() {
        return Err(Error::InvalidInput("F(x0) is not finite".into()));
    }
    let obj = prob.objective();
    let (n, lam, p, lf, flow) = (prob.dim(), prob.lambda(), prob.p(), obj.lipschitz(), obj.lower_bound());
    if f_x0 < flow {
        return Err(Error::InvalidInput(format!("F(x0) = {f_x0} below lower bound {flow}")));
    }
    let psi = |e: f64| threshold_rhs(n, lam, p, lf, f_x0, flow, e);
    let hi0 = psi(0.0);
    if !(hi0.is_finite() && hi0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold is unbounded or degenerate (psi(0) = {hi0:e}); need L_f > 0 and F(x0) > f_low"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, hi0);
    for _ in 0..THRESHOLD_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid < psi(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut eps = lo - tol;
    if eps <= 0.0 {
        eps = 0.5 * lo;
    }
    if !(eps > 0.0 && eps < psi(eps)) {
        return Err(Error::Configuration(format!("no admissible eps found (supremum {lo:e})")));
    }
    Ok(eps)
}
