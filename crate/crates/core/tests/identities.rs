use qcurv_core::endmodel::{end_limits, end_nu, EndProfile, HTerm};
use qcurv_core::functionals::{conformal_mass, profile_alpha0, volume_entropy, Completeness};
use qcurv_core::quadrature::log_points;
use qcurv_core::{
    density_from_profile, potential_from_density, CurvatureDensity, PotentialConfig, RadialProfile, Schedule,
};

fn potential(f: &CurvatureDensity) -> RadialProfile {
    potential_from_density(f, &PotentialConfig::default()).unwrap()
}

#[test]
fn potential_is_linear_in_the_density() {
    let f1 = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
    let f2 = CurvatureDensity::shell(4, 0.3, 1.0, 3.0, 4).unwrap();
    let (u1, u2, u12) = (potential(&f1), potential(&f2), potential(&f1.sum(&f2).unwrap()));
    for r in [0.0, 0.3, 1.0, 1.7, 2.5, 10.0, 1e3] {
        let lhs = u12.eval(r, 0).unwrap();
        let rhs = u1.eval(r, 0).unwrap() + u2.eval(r, 0).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10, "r={r}: {lhs} vs {rhs}");
    }
}

#[test]
fn density_of_potential_recovers_the_density() {
    let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
    let back = density_from_profile(&potential(&f)).unwrap();
    let peak = (0..40).map(|i| f.value(0.05 * i as f64).abs()).fold(0.0, f64::max);
    for i in 1..19 {
        let r = 0.1 * i as f64;
        assert!((back.value(r) - f.value(r)).abs() <= 1e-6 * peak, "r={r}: {} vs {}", back.value(r), f.value(r));
    }
}

#[test]
fn far_field_is_log_plus_inverse_r() {
    let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
    let u = potential(&f);
    let radii = log_points(4.0, 1e4, 4);
    let shifted: Vec<f64> = radii.iter().map(|&r| u.eval(r, 0).unwrap() + 0.5 * r.ln()).collect();
    let c = *shifted.last().unwrap();
    for (r, v) in radii.iter().zip(&shifted) {
        assert!((v - c).abs() * r <= 4.0, "r={r}: {}", (v - c).abs() * r);
    }
}

#[test]
fn mass_identity_within_error_bound() {
    let schedule = Schedule::standard();
    let mut cases: Vec<(RadialProfile, f64)> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&a| (potential(&CurvatureDensity::bump(4, a, 2.0, 4).unwrap()), a))
        .collect();
    cases.push((RadialProfile::sphere(4, 1.0).unwrap(), 2.0));
    for (u, a) in cases {
        let m = conformal_mass(&u, &[0.0, 1.0, 2.0], &schedule).unwrap();
        let want = a * (2.0 - a);
        assert!((m.inf - want).abs() <= m.inf_error.max(1e-12), "alpha0={a}: {} vs {want} (err {:e})", m.inf, m.inf_error);
        assert!((profile_alpha0(&u).unwrap() - a).abs() < 1e-8);
    }
}

#[test]
fn entropy_completeness_regimes() {
    let s = Schedule::geometric(100.0, 10f64.powf(0.25), 9).unwrap();
    let u = potential(&CurvatureDensity::bump(4, 0.25, 2.0, 4).unwrap());
    let v = volume_entropy(&u, &s).unwrap();
    assert_eq!(v.completeness, Completeness::Complete);
    assert!(v.identity_asserted && (v.estimate.limit - 0.75).abs() < 0.05);
    let u = potential(&CurvatureDensity::bump(4, 1.0, 2.0, 4).unwrap());
    assert_eq!(volume_entropy(&u, &s).unwrap().completeness, Completeness::Indeterminate);
}

#[test]
fn end_limit_matches_prediction() {
    let s = Schedule::standard();
    for (alpha2, alpha1) in [(0.5, 0.0), (0.5, -0.3), (0.25, 0.2)] {
        let f = CurvatureDensity::shell(4, alpha2, 1.0, 3.0, 4).unwrap();
        let e = EndProfile::new(f, alpha1, HTerm::Zero, &PotentialConfig::default()).unwrap();
        let nu = end_nu(&e, &s).unwrap();
        let want = 1.0 + alpha1 - alpha2;
        assert!((nu.estimate.limit - want).abs() <= nu.estimate.error.max(1e-9), "{alpha2},{alpha1}: {} vs {want}", nu.estimate.limit);
        let b = end_limits(&e, &s).unwrap().b;
        assert!((nu.estimate.limit - 1.0 - b.limit).abs() <= nu.estimate.error + b.error);
        assert!(nu.range_ok);
    }
}
