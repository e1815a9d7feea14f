use lpirl_core::approx::{satisfies_threshold, EpsApprox};
use lpirl_core::solvers::{solve, solve_lasso_warmstart, verify_run, Method, SolverConfig, Status};
use lpirl_core::stationarity::{first_order_residual, lower_bound_first, second_order_check};
use lpirl_core::subproblems::Alpha;
use lpirl_core::{DMatrix, DVector, Error, LeastSquares, LpProblem, SmoothObjective};

// Roots of phi(t) = h t - c + lambda p |t|^(p-1) sgn(t) over t != 0, by a
// log-spaced scan of each half-line and bisection on sign changes.
fn roots_1d(h: f64, c: f64, lp: f64, p: f64, r: f64, k: usize) -> Vec<f64> {
    let phi = |t: f64| h * t - c + lp * t.abs().powf(p - 1.0) * t.signum();
    let mut out = Vec::new();
    for sign in [-1.0, 1.0] {
        let (lo, hi) = ((1e-14f64).ln(), r.ln());
        let at = |i: usize| sign * (lo + (hi - lo) * i as f64 / k as f64).exp();
        for i in 0..k {
            let (a, b) = (at(i), at(i + 1));
            if phi(a).signum() != phi(b).signum() {
                let (mut a, mut b) = (a, b);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if phi(mid).signum() == phi(a).signum() {
                        a = mid
                    } else {
                        b = mid
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
    }
    out
}

// All solutions of X grad f(x) + lambda p |x|^p = 0 for 1-D or 2-D least
// squares, enumerated support by support.
fn stationary_points(ls: &LeastSquares, lambda: f64, p: f64) -> Vec<DVector<f64>> {
    let n = ls.dim();
    let h = ls.a().tr_mul(ls.a());
    let c = ls.a().tr_mul(ls.b());
    let lp = lambda * p;
    let r = 100.0 * (1.0 + c.amax());
    let mut pts = vec![DVector::zeros(n)];
    for i in 0..n {
        for t in roots_1d(h[(i, i)], c[i], lp, p, r, 20_000) {
            let mut x = DVector::zeros(n);
            x[i] = t;
            pts.push(x);
        }
    }
    if n == 2 {
        // Both coordinates nonzero: for each x0 on a log grid, x1 solves the
        // second equation exactly (1-D roots); sign changes of the first
        // equation along each branch bracket the 2-D roots.
        let g0 = |x0: f64, x1: f64| h[(0, 0)] * x0 + h[(0, 1)] * x1 - c[0] + lp * x0.abs().powf(p - 1.0) * x0.signum();
        let branch = |x0: f64| roots_1d(h[(1, 1)], c[1] - h[(1, 0)] * x0, lp, p, r, 2000);
        for sign in [-1.0, 1.0] {
            let (lo, hi) = ((1e-10f64).ln(), r.ln());
            let k = 3000;
            let at = |i: usize| sign * (lo + (hi - lo) * i as f64 / k as f64).exp();
            let mut prev: Option<(f64, Vec<f64>)> = None;
            for i in 0..=k {
                let x0 = at(i);
                let br = branch(x0);
                if let Some((px0, pbr)) = &prev {
                    if pbr.len() == br.len() {
                        for (j, (&a1, &b1)) in pbr.iter().zip(br.iter()).enumerate() {
                            if g0(*px0, a1).signum() != g0(x0, b1).signum() && (a1 - b1).abs() < 0.1 * (1.0 + a1.abs()) {
                                // bisect along branch j
                                let (mut a, mut b) = (*px0, x0);
                                let sa = g0(*px0, a1).signum();
                                let mut x1 = b1;
                                for _ in 0..100 {
                                    let mid = 0.5 * (a + b);
                                    let bm = branch(mid);
                                    if bm.len() != br.len() {
                                        break;
                                    }
                                    x1 = bm[j];
                                    if g0(mid, x1).signum() == sa {
                                        a = mid
                                    } else {
                                        b = mid
                                    }
                                }
                                pts.push(DVector::from_vec(vec![0.5 * (a + b), x1]));
                            }
                        }
                    }
                }
                prev = Some((x0, br));
            }
        }
    }
    pts
}

fn nearest(pts: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    pts.iter().map(|q| (q - x).amax()).fold(f64::INFINITY, f64::min)
}

fn modes() -> Vec<(Method, Alpha)> {
    let mut v = Vec::new();
    for m in Method::ALL {
        v.push((m, Alpha::One));
        if m.family() != lpirl_core::solvers::Family::NewIrl1 {
            v.push((m, Alpha::Two));
        }
    }
    v
}

fn scalar_problem() -> LpProblem<LeastSquares> {
    let ls = LeastSquares::new(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, 1.0)).unwrap();
    LpProblem::new(ls, 0.1, 0.5).unwrap()
}

#[test]
fn enumeration_finds_the_known_scalar_roots() {
    let prob = scalar_problem();
    let pts = stationary_points(prob.objective(), 0.1, 0.5);
    let mut vals: Vec<f64> = pts.iter().map(|x| x[0]).collect();
    vals.sort_by(f64::total_cmp);
    assert_eq!(vals.len(), 3);
    assert_eq!(vals[0], 0.0);
    assert!((vals[1] - 0.002_512_610_561).abs() < 1e-11);
    assert!((vals[2] - 0.948_665_000_126).abs() < 1e-11);
    for x in &pts {
        assert!(first_order_residual(&prob, x).unwrap() < 1e-12);
    }
}

#[test]
fn scalar_runs_land_on_stationary_points() {
    let prob = scalar_problem();
    let pts = stationary_points(prob.objective(), 0.1, 0.5);
    for start in [0.7, 2.0, -0.4, 0.01] {
        let x0 = DVector::from_element(1, start);
        for (m, a) in modes() {
            let cfg = SolverConfig::new(m).with_alpha(a).with_tol(1e-10);
            let run = solve(&prob, &cfg, &x0).unwrap();
            assert_eq!(run.status, Status::Converged, "{m} {a:?} from {start}: {:?}", run.message);
            let d = nearest(&pts, &run.final_x());
            assert!(d <= 1e-6, "{m} {a:?} from {start}: {:?} is {d:e} from every root", run.final_x);
            for c in verify_run(&run) {
                assert!(c.passed, "{m} {a:?}: {} {}", c.name, c.detail);
            }
        }
    }
}

#[test]
fn planar_runs_land_on_stationary_points() {
    let cases = [
        (vec![1.0, 0.4, 0.2, 0.8], vec![1.0, -0.5], 0.1, 0.5),
        (vec![0.9, -0.3, 0.5, 1.1], vec![0.3, 0.8], 0.05, 0.3),
        (vec![2.0, 1.0, 1.0, 1.5], vec![1.0, 1.0], 0.2, 0.7),
    ];
    for (a, b, lambda, p) in cases {
        let ls = LeastSquares::new(DMatrix::from_row_slice(2, 2, &a), DVector::from_vec(b)).unwrap();
        let pts = stationary_points(&ls, lambda, p);
        let prob = LpProblem::new(ls, lambda, p).unwrap();
        for x in &pts {
            assert!(first_order_residual(&prob, x).unwrap() < 1e-8, "enumerated {x:?} is not stationary");
        }
        assert!(pts.iter().any(|x| x[0] != 0.0 && x[1] != 0.0), "no full-support root in {pts:?}");
        let warm = solve_lasso_warmstart(prob.objective(), lambda, 1e-10).unwrap();
        let mut converged = 0;
        for x0 in [warm, DVector::from_vec(vec![0.5, -0.5]), DVector::from_vec(vec![-1.0, 2.0])] {
            for (m, al) in modes() {
                let cfg = SolverConfig::new(m).with_alpha(al).with_tol(1e-10);
                let run = solve(&prob, &cfg, &x0).unwrap();
                if run.status != Status::Converged {
                    continue;
                }
                converged += 1;
                let d = nearest(&pts, &run.final_x());
                assert!(d <= 1e-6, "{m} {al:?}: {:?} is {d:e} from every root {pts:?}", run.final_x);
            }
        }
        assert_eq!(converged, 3 * modes().len(), "some runs stopped early");
    }
}

#[test]
fn second_order_separates_the_scalar_roots() {
    let prob = scalar_problem();
    let h = DMatrix::from_element(1, 1, 1.0);
    assert!(second_order_check(&prob, &DVector::from_element(1, 0.948_665_000_126), &h).unwrap());
    assert!(!second_order_check(&prob, &DVector::from_element(1, 0.002_512_610_561), &h).unwrap());
    // the prox runs from the lasso point end at the local minimizer
    let x0 = solve_lasso_warmstart(prob.objective(), 0.1, 1e-12).unwrap();
    let run = solve(&prob, &SolverConfig::new(Method::NewIrl1Prox).with_tol(1e-10), &x0).unwrap();
    assert_eq!(run.report.unwrap().second_order_psd, Some(true));
}

#[test]
fn new_irl1_respects_first_order_bound() {
    let prob = scalar_problem();
    let x0 = DVector::zeros(1).add_scalar(0.7);
    for m in [Method::NewIrl1Exact, Method::NewIrl1Prox] {
        let run = solve(&prob, &SolverConfig::new(m).with_tol(1e-10), &x0).unwrap();
        let eps = run.fixed_eps.unwrap();
        assert!(satisfies_threshold(&prob, &x0, eps).unwrap());
        assert_eq!(run.eps_descent_holds, Some(true));
        let bound = lower_bound_first(&prob, prob.value(&x0).unwrap(), eps).unwrap();
        let rep = run.report.clone().unwrap();
        assert_eq!(rep.first_order_bound, bound);
        assert!(rep.min_abs_on_support.unwrap() >= bound);
        // the merit trace is F_eps
        let approx = EpsApprox::new(&prob, eps).unwrap();
        let last = run.trace.last().unwrap().merit;
        assert!((last - approx.value(&prob, &run.final_x()).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn fixed_eps_above_threshold_is_rejected() {
    let prob = scalar_problem();
    let mut cfg = SolverConfig::new(Method::NewIrl1Prox);
    cfg.fixed_eps = Some(10.0);
    let err = solve(&prob, &cfg, &DVector::from_element(1, 0.7)).unwrap_err();
    assert!(matches!(err, Error::Configuration(_)), "{err}");
}

#[test]
fn runs_are_deterministic() {
    let a = DMatrix::from_fn(6, 10, |i, j| ((i * 10 + j) as f64 * 0.37).sin());
    let b = DVector::from_fn(6, |i, _| (i as f64 * 1.3).cos());
    let prob = LpProblem::new(LeastSquares::new(a, b).unwrap(), 0.01, 0.5).unwrap();
    let x0 = solve_lasso_warmstart(prob.objective(), 0.01, 1e-8).unwrap();
    for (m, al) in modes() {
        let cfg = SolverConfig::new(m).with_alpha(al).with_path();
        let r1 = solve(&prob, &cfg, &x0).unwrap();
        let r2 = solve(&prob, &cfg, &x0).unwrap();
        assert_eq!(r1, r2, "{m} {al:?}");
        assert_eq!(r1.path.as_ref().unwrap().len(), r1.trace.len());
    }
}

#[test]
fn alpha_two_runs_meet_invariants() {
    let a = DMatrix::from_fn(8, 12, |i, j| ((i * 12 + j) as f64 * 0.91).cos());
    let b = DVector::from_fn(8, |i, _| (i as f64).sin());
    let prob = LpProblem::new(LeastSquares::new(a, b).unwrap(), 0.02, 0.5).unwrap();
    let x0 = solve_lasso_warmstart(prob.objective(), 0.02, 1e-8).unwrap();
    for m in [Method::Type1Exact, Method::Type1Prox, Method::Type2Exact, Method::Type2Prox] {
        let run = solve(&prob, &SolverConfig::new(m).with_alpha(Alpha::Two), &x0).unwrap();
        assert_eq!(run.status, Status::Converged, "{m}: {:?}", run.message);
        assert!(run.final_residual().unwrap() <= 1e-4);
        for c in verify_run(&run) {
            assert!(c.passed, "{m}: {} {}", c.name, c.detail);
        }
    }
}

#[test]
fn lasso_on_orthonormal_rows_is_soft_thresholding() {
    // rows of A orthonormal and n = m: A is orthogonal, lasso decouples
    let (c, s) = (0.6f64, 0.8f64);
    let a = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let b = DVector::from_vec(vec![0.9, -0.2]);
    let ls = LeastSquares::new(a.clone(), b.clone()).unwrap();
    let z = a.tr_mul(&b);
    let lambda = 0.3;
    let expect = z.map(|v| v.signum() * (v.abs() - lambda).max(0.0));
    let x = solve_lasso_warmstart(&ls, lambda, 1e-12).unwrap();
    assert!((x - expect).amax() < 1e-11);
}
