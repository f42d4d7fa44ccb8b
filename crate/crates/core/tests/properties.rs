use proptest::prelude::*;
use qcurv_core::calculus::{polyharmonic, q_curvature, scalar_curvature};
use qcurv_core::endmodel::{isoperimetric_ratio, EndProfile, HTerm};
use qcurv_core::functionals::exp_mean_ratio;
use qcurv_core::harness::{CheckReport, Expected};
use qcurv_core::{angular_log_avg, angular_pow_avg, LimitEstimate, LimitScale, RadialProfile, Schedule};

fn dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(4usize), Just(6usize)]
}

fn log_radius(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn closed_form(n: usize) -> impl Strategy<Value = RadialProfile> {
    prop_oneof![
        (0.2f64..5.0).prop_map(move |l| RadialProfile::sphere(n, l).unwrap()),
        (-2.0f64..2.0).prop_map(move |b| RadialProfile::counterexample(n, b).unwrap()),
        (-3.0f64..3.0).prop_map(move |a| RadialProfile::quadratic(n, a).unwrap()),
        (-3.0f64..3.0).prop_map(move |c| RadialProfile::constant(n, c).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_kernel_is_symmetric(n in dim(), r in log_radius(0.01, 100.0), s in log_radius(0.01, 100.0)) {
        let a = angular_log_avg(n, r, s).unwrap();
        let b = angular_log_avg(n, s, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} {b}");
    }

    #[test]
    fn newtonian_mean_is_exact(n in dim(), r in log_radius(0.1, 10.0), s in log_radius(0.1, 10.0)) {
        let v = angular_pow_avg(n, r, s, (n - 2) as f64).unwrap();
        prop_assert!((v - r.max(s).powi(2 - n as i32)).abs() <= 1e-10);
    }

    #[test]
    fn mean_value_bound(n in dim(), k in 1usize..5, r in log_radius(0.1, 10.0), s in log_radius(0.1, 10.0)) {
        let k = 1 + (k - 1) % (n - 2);
        prop_assert!(s.powi(k as i32) * angular_pow_avg(n, r, s, k as f64).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn jensen_ratio_is_at_least_one(
        u in closed_form(4),
        c in 0.0f64..5.0,
        k in -6.0f64..6.0,
        r in log_radius(0.05, 200.0),
    ) {
        let v = exp_mean_ratio(&u, c, k, r).unwrap();
        prop_assert!(v >= 1.0 - 1e-12, "{v}");
    }

    #[test]
    fn polyharmonic_is_linear(
        n in dim(),
        u in (0.2f64..5.0),
        v in (-2.0f64..2.0),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        r in 0.0f64..10.0,
    ) {
        let pu = RadialProfile::sphere(n, u).unwrap();
        let pv = RadialProfile::counterexample(n, v).unwrap();
        let combo = RadialProfile::linear_combination(&[(a, &pu), (b, &pv)]).unwrap();
        for m in 1..=n / 2 {
            let lhs = polyharmonic(&combo, r, m).unwrap();
            let x = polyharmonic(&pu, r, m).unwrap();
            let y = polyharmonic(&pv, r, m).unwrap();
            let rhs = a * x + b * y;
            let scale = 1.0 + (a * x).abs() + (b * y).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "m={m}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn sphere_q_is_lambda_independent(n in dim(), lambda in 0.2f64..5.0, r in 0.0f64..10.0) {
        let p = RadialProfile::sphere(n, lambda).unwrap();
        let want = if n == 4 { 6.0 } else { 120.0 };
        prop_assert!((q_curvature(&p, r).unwrap() - want).abs() <= 1e-8);
        prop_assert!(scalar_curvature(&p, r).unwrap() >= 0.0);
    }

    #[test]
    fn odd_derivatives_vanish_at_origin(n in dim(), u in closed_form(6)) {
        let u = match u.closed_form() {
            Some(cf) => RadialProfile::elementary(n, cf).unwrap(),
            None => u,
        };
        for k in (1..=n).step_by(2) {
            prop_assert!(u.eval(0.0, k).unwrap().abs() <= 1e-14, "order {k}");
        }
    }

    #[test]
    fn second_derivative_matches_finite_differences(u in closed_form(4), r in 0.1f64..10.0) {
        let h = 1e-4 * r;
        let fd = (u.eval(r + h, 1).unwrap() - u.eval(r - h, 1).unwrap()) / (2.0 * h);
        let exact = u.eval(r, 2).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn extrapolation_recovers_power_series(l in -5.0f64..5.0, a in -50.0f64..50.0, b in -500.0f64..500.0) {
        let e = LimitEstimate::sample(&Schedule::standard(), LimitScale::Power, |r| Ok(l + a / r + b / (r * r))).unwrap();
        prop_assert!((e.limit - l).abs() <= 1e-9 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn isoperimetric_ratio_is_positive(alpha1 in -2.0f64..1.0, c in -1.0f64..1.0, r in log_radius(1.01, 1e4)) {
        for h in [HTerm::Zero, HTerm::Constant(c), HTerm::InverseSquare(c)] {
            let e = EndProfile::without_density(alpha1, h).unwrap();
            prop_assert!(isoperimetric_ratio(&e, r).unwrap() > 0.0);
        }
    }

    #[test]
    fn pass_matches_tolerance_rule(v in -10.0f64..10.0, m in -10.0f64..10.0, tol in 0.0f64..5.0, lo in -5.0f64..0.0, w in 0.0f64..5.0) {
        prop_assert_eq!(CheckReport::decide(Expected::Point { value: v }, m, tol, true), (m - v).abs() <= tol);
        let hi = lo + w;
        prop_assert_eq!(
            CheckReport::decide(Expected::Interval { lo, hi }, m, tol, true),
            m >= lo - tol && m <= hi + tol
        );
    }
}
