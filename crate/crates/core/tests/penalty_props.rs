use lpirl_core::approx::{h_u, h_u_subdiff, EpsApprox};
use lpirl_core::problem::conjugate_exponent;
use lpirl_core::subproblems::{majorizer, majorizer_argmin, prox_weighted_l1, prox_weighted_l2, Alpha};
use lpirl_core::{DMatrix, DVector, LeastSquares, LpProblem};
use proptest::prelude::*;

// u chosen through its knee u^(q-1), log-uniform in [1e-2, 10], so that both
// branches are exercised and values stay O(1).
fn u_from_knee(knee: f64, p: f64) -> f64 {
    knee.powf(1.0 / (conjugate_exponent(p) - 1.0))
}

// Golden-section search for a unimodal function on [lo, hi].
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

// Grid scan then golden-section refinement inside the best cell.
fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> f64 {
    let h = (hi - lo) / cells as f64;
    let best = (0..=cells).min_by(|&i, &j| f(lo + i as f64 * h).total_cmp(&f(lo + j as f64 * h))).unwrap();
    let c = lo + best as f64 * h;
    golden_min(&f, (c - h).max(lo), (c + h).min(hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn h_u_sandwich(t in -30.0..30.0f64, lk in -2.0..1.0f64, p in 0.05..0.95f64) {
        let u = u_from_knee(10f64.powf(lk), p);
        let q = conjugate_exponent(p);
        let gap = h_u(t, u, p, q).unwrap() - t.abs().powf(p);
        prop_assert!(gap >= -1e-12, "gap {gap}");
        prop_assert!(gap <= u.powf(q) + 1e-12, "gap {gap} > u^q {}", u.powf(q));
    }

    #[test]
    fn h_u_lipschitz(t1 in -5.0..5.0f64, t2 in -5.0..5.0f64, lk in -2.0..1.0f64, p in 0.05..0.95f64) {
        let u = u_from_knee(10f64.powf(lk), p);
        let q = conjugate_exponent(p);
        let d = (h_u(t1, u, p, q).unwrap() - h_u(t2, u, p, q).unwrap()).abs();
        prop_assert!(d <= p * u * (t1 - t2).abs() + 1e-12);
    }

    #[test]
    fn h_u_is_even_and_subgradient_bounded(t in -5.0..5.0f64, lk in -2.0..1.0f64, p in 0.05..0.95f64) {
        let u = u_from_knee(10f64.powf(lk), p);
        let q = conjugate_exponent(p);
        prop_assert_eq!(h_u(t, u, p, q).unwrap(), h_u(-t, u, p, q).unwrap());
        let g = h_u_subdiff(t, u, p, q).unwrap();
        prop_assert!(g.lo >= -p * u * (1.0 + 1e-12) && g.hi <= p * u * (1.0 + 1e-12));
    }

    #[test]
    fn h_u_matches_inner_minimization(t in -3.0..3.0f64, lk in -2.0..1.0f64, p in 0.1..0.9f64) {
        let u = u_from_knee(10f64.powf(lk), p);
        let q = conjugate_exponent(p);
        let inner = |s: f64| p * (t.abs() * s - s.powf(q) / q);
        // the inner objective is convex and decreasing once t = 0; search on [0, u]
        let s = grid_argmin(inner, 1e-300f64.max(u * 1e-9), u, 2000);
        let oracle = inner(s);
        let v = h_u(t, u, p, q).unwrap();
        prop_assert!((v - oracle).abs() <= 1e-8 * (1.0 + v.abs()), "{v} vs {oracle}");
    }

    #[test]
    fn f_eps_sandwich(seed in 0u64..1000, n in 1usize..40, le in -6.0..1.0f64, p in 0.05..0.95f64, lam in 0.001..1.0f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = (n / 2).max(1);
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let x = DVector::from_fn(n, |_, _| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-3.0..3.0) });
        let prob = LpProblem::new(LeastSquares::new(a, b).unwrap(), lam, p).unwrap();
        let eps = 10f64.powf(le);
        let approx = EpsApprox::new(&prob, eps).unwrap();
        let (fe, f) = (approx.value(&prob, &x).unwrap(), prob.value(&x).unwrap());
        let slack = 1e-10 * (1.0 + f.abs());
        prop_assert!(fe - f >= -slack && fe - f <= eps + slack, "F_eps - F = {}", fe - f);
        let gap = approx.gap(&x);
        prop_assert!(gap >= 0.0 && gap <= eps * (1.0 + 1e-12));
    }

    #[test]
    fn prox_l1_matches_grid(xb in -3.0..3.0f64, g in -3.0..3.0f64, l in 0.1..10.0f64, w in 0.0..3.0f64) {
        let y = prox_weighted_l1(&DVector::from_element(1, xb), &DVector::from_element(1, g), l, &DVector::from_element(1, w)).unwrap()[0];
        let obj = |y: f64| g * (y - xb) + 0.5 * l * (y - xb).powi(2) + w * y.abs();
        let r = xb.abs() + g.abs() / l + 1.0;
        let oracle = grid_argmin(obj, -r, r, 4000);
        prop_assert!((y - oracle).abs() <= 1e-6, "{y} vs {oracle}");
    }

    #[test]
    fn prox_l2_matches_grid(xb in -3.0..3.0f64, g in -3.0..3.0f64, l in 0.1..10.0f64, w in 0.0..3.0f64) {
        let y = prox_weighted_l2(&DVector::from_element(1, xb), &DVector::from_element(1, g), l, &DVector::from_element(1, w)).unwrap()[0];
        let obj = |y: f64| g * (y - xb) + 0.5 * l * (y - xb).powi(2) + 0.5 * w * y * y;
        let r = xb.abs() + g.abs() / l + 1.0;
        let oracle = grid_argmin(obj, -r, r, 4000);
        prop_assert!((y - oracle).abs() <= 1e-6, "{y} vs {oracle}");
    }

    #[test]
    fn majorizer_identity(t in -3.0..3.0f64, ld in -4.0..0.5f64, p in 0.05..0.95f64, two in any::<bool>()) {
        let alpha = if two { Alpha::Two } else { Alpha::One };
        let delta = 10f64.powf(ld);
        let closed = (t.abs().powf(alpha.value()) + delta).powf(p / alpha.value());
        // minimize over log s so the search covers many decades evenly
        let obj = |z: f64| majorizer(t, delta, z.exp(), p, alpha);
        let z = grid_argmin(obj, -60.0, 60.0, 4000);
        prop_assert!((obj(z) - closed).abs() <= 1e-8 * (1.0 + closed), "{} vs {closed}", obj(z));
        let s = majorizer_argmin(t, delta, p, alpha);
        prop_assert!((majorizer(t, delta, s, p, alpha) - closed).abs() <= 1e-12 * (1.0 + closed));
    }
}
