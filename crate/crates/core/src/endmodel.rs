//! Simple ends on `R⁴ \ B₁`: `w = P[f] + α₁ log r + h` with `f` supported in `|y| ≥ 1`,
//! and the isoperimetric ratio
//! `I(r) = (∫_{∂B_r} e^{3w})^{4/3} / (4 (2π²)^{1/3} ∫_{B_r∖B₁} e^{4w})`,
//! which for radial `w` reduces to `r⁴ e^{4w(r)} / (4 ∫₁^r e^{4w} s³ ds)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::limits::{LimitEstimate, LimitScale, Schedule};
use crate::potential::{potential_from_density, PotentialConfig};
use crate::profiles::{CurvatureDensity, RadialProfile};
use crate::quadrature::{log_points, reference_rule};

/// The harmonic-at-infinity part `h` of an end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coeff", rename_all = "snake_case")]
pub enum HTerm {
    Zero,
    /// `h = c`
    Constant(f64),
    /// `h = c / r²`
    InverseSquare(f64),
}

impl HTerm {
    /// `(h, h', h'')` at `r`.
    pub fn jet(&self, r: f64) -> [f64; 3] {
        match *self {
            HTerm::Zero => [0.0; 3],
            HTerm::Constant(c) => [c, 0.0, 0.0],
            HTerm::InverseSquare(c) => [c / (r * r), -2.0 * c / r.powi(3), 6.0 * c / r.powi(4)],
        }
    }
}

/// A four-dimensional simple end.
#[derive(Debug, Clone)]
pub struct EndProfile {
    density: CurvatureDensity,
    alpha1: f64,
    h: HTerm,
    potential: Option<RadialProfile>,
}

impl EndProfile {
    /// The density must vanish inside the unit ball.
    pub fn new(density: CurvatureDensity, alpha1: f64, h: HTerm, cfg: &PotentialConfig) -> Result<Self> {
        if density.dimension() != 4 {
            return Err(Error::UnsupportedDimension(density.dimension()));
        }
        if density.support().start() < 1.0 - 1e-12 {
            return Err(invalid("end densities must be supported in |y| >= 1"));
        }
        if !alpha1.is_finite() {
            return Err(invalid("alpha1 must be finite"));
        }
        let vanishes = density.total() == 0.0
            && log_points(1.0, density.effective_radius().max(2.0), 8).iter().all(|&s| density.value(s) == 0.0);
        let potential = if vanishes {
            None
        } else {
            let cfg = PotentialConfig { constant: 0.0, ..cfg.clone() };
            Some(potential_from_density(&density, &cfg)?)
        };
        Ok(Self { density, alpha1, h, potential })
    }

    /// `w = α₁ log r + h` with no curvature.
    pub fn without_density(alpha1: f64, h: HTerm) -> Result<Self> {
        let zero = CurvatureDensity::compact(4, "zero", 1.0, 2.0, std::sync::Arc::new(|_| 0.0))?;
        Self::new(zero, alpha1, h, &PotentialConfig::default())
    }

    pub fn density(&self) -> &CurvatureDensity {
        &self.density
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    /// `α₂ = (1/8π²) ∫_{R⁴∖B₁} f`.
    pub fn alpha2(&self) -> f64 {
        self.density.alpha0()
    }
    pub fn h(&self) -> HTerm {
        self.h
    }
    /// Largest radius at which `w` can be evaluated.
    pub fn max_radius(&self) -> f64 {
        self.potential.as_ref().map_or(f64::INFINITY, |p| p.domain().1)
    }

    /// `(w, w', w'')` at `r >= 1`.
    pub fn jet(&self, r: f64) -> Result<[f64; 3]> {
        if !(r >= 1.0) {
            return Err(invalid(format!("end profiles are defined for r >= 1, got {r}")));
        }
        let mut out = self.h.jet(r);
        out[0] += self.alpha1 * r.ln();
        out[1] += self.alpha1 / r;
        out[2] -= self.alpha1 / (r * r);
        if let Some(p) = &self.potential {
            let j = p.jet(r, 2)?;
            for k in 0..3 {
                out[k] += j[k];
            }
        }
        Ok(out)
    }

    /// `R_g` at `r`: `6 e^{-2w} (-Δw - |∇w|²)`.
    pub fn scalar_curvature(&self, r: f64) -> Result<f64> {
        let [w, d1, d2] = self.jet(r)?;
        Ok(6.0 * (-2.0 * w).exp() * (-(d2 + 3.0 * d1 / r) - d1 * d1))
    }
}

pub fn end_profile_eval(e: &EndProfile, r: f64) -> Result<f64> {
    Ok(e.jet(r)?[0])
}

/// Spherical-mean limits of an end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndLimits {
    /// `r² ⨍(-Δw)`, predicted `2(α₂ - α₁)`.
    pub a: LimitEstimate,
    /// `r w̄'`, predicted `α₁ - α₂`.
    pub b: LimitEstimate,
    /// `r² ⨍|∇w|²`, predicted `(α₂ - α₁)²`.
    pub c: LimitEstimate,
}

pub fn end_limits(e: &EndProfile, schedule: &Schedule) -> Result<EndLimits> {
    let d = e.alpha2() - e.alpha1();
    let a = LimitEstimate::sample(schedule, LimitScale::Power, |r| {
        let [_, d1, d2] = e.jet(r)?;
        Ok(-r * r * (d2 + 3.0 * d1 / r))
    })?;
    let b = LimitEstimate::sample(schedule, LimitScale::Power, |r| Ok(r * e.jet(r)?[1]))?;
    let c = LimitEstimate::sample(schedule, LimitScale::Power, |r| {
        let d1 = e.jet(r)?[1];
        Ok(r * r * d1 * d1)
    })?;
    Ok(EndLimits { a: a.with_prediction(2.0 * d), b: b.with_prediction(-d), c: c.with_prediction(d * d) })
}

/// `I_g(r)` for `r > 1`.
pub fn isoperimetric_ratio(e: &EndProfile, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(invalid("the isoperimetric ratio needs r > 1"));
    }
    let wr = e.jet(r)?[0];
    let (x, wts) = reference_rule(16);
    let mut acc = 0.0;
    for pw in log_points(1.0, r, 32).windows(2) {
        let (a, b) = (pw[0], pw[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(wts) {
            let s = mid + half * xi;
            let ws = e.jet(s)?[0];
            acc += wi * half * (4.0 * (ws - wr)).exp() * (s / r).powi(3) / r;
        }
    }
    if !(acc > 0.0) || !acc.is_finite() {
        return Err(Error::NonIntegrable(format!("volume integral {acc:e} at r = {r}")));
    }
    Ok(1.0 / (4.0 * acc))
}

/// Limit of the isoperimetric ratio with the scalar-curvature range checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndNu {
    pub estimate: LimitEstimate,
    /// `1 + α₁ - α₂`.
    pub prediction: f64,
    /// `R_g >= 0` on the sampled end.
    pub scalar_nonnegative: bool,
    /// `R_g` stays above a positive constant on the sampled end.
    pub scalar_bounded_below: bool,
    /// Limit lies in `[0, 1]` when `R_g >= 0`, and vanishes when `R_g >= C > 0`,
    /// both to within the estimator error.
    pub range_ok: bool,
}

pub fn end_nu(e: &EndProfile, schedule: &Schedule) -> Result<EndNu> {
    let values = schedule
        .radii
        .par_iter()
        .map(|&r| isoperimetric_ratio(e, r))
        .collect::<Result<Vec<_>>>()?;
    let estimate = LimitEstimate::from_samples(schedule.radii.clone(), values, LimitScale::Auto)?;
    let prediction = 1.0 + e.alpha1() - e.alpha2();
    let (r0, r1) = (schedule.radii[0], *schedule.radii.last().unwrap());
    let samples = log_points(r0, r1, 8)
        .into_iter()
        .map(|r| e.scalar_curvature(r))
        .collect::<Result<Vec<_>>>()?;
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-12 * scale.max(1.0);
    let scalar_nonnegative = samples.iter().all(|&v| v >= -floor);
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let scalar_bounded_below = min > floor && samples.last().unwrap() >= &(0.5 * samples[0]);
    let tol = estimate.error + 1e-9;
    let l = estimate.limit;
    let in_unit = l >= -tol && l <= 1.0 + tol;
    let vanishes = l.abs() <= tol;
    let range_ok = (!scalar_nonnegative || in_unit) && (!scalar_bounded_below || vanishes);
    Ok(EndNu { estimate: estimate.with_prediction(prediction), prediction, scalar_nonnegative, scalar_bounded_below, range_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_ends() {
        let flat = EndProfile::without_density(0.0, HTerm::Zero).unwrap();
        assert_eq!(end_profile_eval(&flat, 3.0).unwrap(), 0.0);
        let log = EndProfile::without_density(-1.0, HTerm::Zero).unwrap();
        assert!((end_profile_eval(&log, 10.0).unwrap() + 10f64.ln()).abs() < 1e-15);
        assert!(end_profile_eval(&log, 0.5).is_err());
    }

    #[test]
    fn flat_isoperimetric_ratio() {
        let flat = EndProfile::without_density(0.0, HTerm::Zero).unwrap();
        for r in [2.0f64, 10.0, 1e3] {
            let want = r.powi(4) / (r.powi(4) - 1.0);
            assert!((isoperimetric_ratio(&flat, r).unwrap() / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_log_end() {
        let e = EndProfile::without_density(-1.0, HTerm::Zero).unwrap();
        let l = end_limits(&e, &Schedule::standard()).unwrap();
        assert!(l.a.within(2.0, 1e-10) && l.b.within(-1.0, 1e-10) && l.c.within(1.0, 1e-10));
        let r = 50.0;
        assert!((isoperimetric_ratio(&e, r).unwrap() - 1.0 / (4.0 * r.ln())).abs() < 1e-12);
        let nu = end_nu(&e, &Schedule::standard()).unwrap();
        assert!(nu.estimate.limit.abs() < 1e-3);
        assert!(nu.scalar_bounded_below && nu.range_ok);
    }

    #[test]
    fn h_terms_leave_limits_unchanged() {
        for h in [HTerm::Constant(0.3), HTerm::InverseSquare(2.0)] {
            let e = EndProfile::without_density(0.0, h).unwrap();
            let nu = end_nu(&e, &Schedule::standard()).unwrap();
            assert!((nu.estimate.limit - 1.0).abs() < 1e-3, "{h:?}: {}", nu.estimate.limit);
        }
    }

    #[test]
    fn interior_densities_are_rejected() {
        let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
        assert!(EndProfile::new(f, 0.0, HTerm::Zero, &PotentialConfig::default()).is_err());
    }
}
