//! Limit functionals of a radial conformal factor: `α₀`, spherical-mean asymptotics,
//! exponential and ball means, volume entropy and conformal mass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{gradient_sq, radial_laplacian, scalar_curvature_weighted};
use crate::constants::{ball_volume, factorial, sphere_area};
use crate::error::{invalid, Error, Result};
use crate::kernels::{offcenter_nodes, offcenter_radial_avg};
use crate::limits::{LimitEstimate, LimitScale, Schedule};
use crate::potential::{potential_from_density, PotentialConfig, QFunction};
use crate::profiles::{density_from_profile, CurvatureDensity, RadialProfile};
use crate::quadrature::{gl_integrate, log_points, reference_rule};

/// `2 ∫ f / ((n-1)! |S^n|)`.
pub fn alpha0(f: &CurvatureDensity) -> f64 {
    f.alpha0()
}

/// `α₀` of a profile through its curvature density.
pub fn profile_alpha0(p: &RadialProfile) -> Result<f64> {
    match p.potential() {
        Some(pot) => Ok(pot.source().alpha0()),
        None => Ok(density_from_profile(p)?.alpha0()),
    }
}

/// The three spherical-mean limits and the log-slope of the mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanLimits {
    /// `r² ⨍(-Δu)`, predicted `(n-2) α₀`.
    pub laplacian: LimitEstimate,
    /// `r ū'`, predicted `-α₀`.
    pub slope: LimitEstimate,
    /// `r² ⨍|∇u|²`, predicted `α₀²`.
    pub gradient: LimitEstimate,
    /// `ū(r) / log r`, predicted `-α₀`.
    pub log_ratio: LimitEstimate,
}

impl MeanLimits {
    pub fn all_converged(&self) -> bool {
        self.laplacian.converged && self.slope.converged && self.gradient.converged && self.log_ratio.converged
    }
}

/// Spherical-mean limits about the origin; for radial profiles these means are values.
pub fn sphere_mean_limits(p: &RadialProfile, schedule: &Schedule) -> Result<MeanLimits> {
    let n = p.dimension() as f64;
    let a = profile_alpha0(p).ok();
    let with = |e: LimitEstimate, pred: Option<f64>| match pred {
        Some(v) => e.with_prediction(v),
        None => e,
    };
    let laplacian = LimitEstimate::sample(schedule, LimitScale::Power, |r| Ok(-r * r * radial_laplacian(p, r)?))?;
    let slope = LimitEstimate::sample(schedule, LimitScale::Power, |r| Ok(r * p.eval(r, 1)?))?;
    let gradient = LimitEstimate::sample(schedule, LimitScale::Power, |r| Ok(r * r * gradient_sq(p, r)?))?;
    let log_ratio = LimitEstimate::sample(schedule, LimitScale::Log, |r| Ok(p.eval(r, 0)? / r.ln()))?;
    Ok(MeanLimits {
        laplacian: with(laplacian, a.map(|a| (n - 2.0) * a)),
        slope: with(slope, a.map(|a| -a)),
        gradient: with(gradient, a.map(|a| a * a)),
        log_ratio: with(log_ratio, a.map(|a| -a)),
    })
}

/// `⨍_{∂B_r(c e₁)} e^{ku} / exp(k ⨍_{∂B_r(c e₁)} u)`, computed in log space.
pub fn exp_mean_ratio(p: &RadialProfile, c: f64, k: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !(c >= 0.0) {
        return Err(invalid("exp_mean_ratio needs r > 0 and c >= 0"));
    }
    if c == 0.0 {
        p.eval(r, 0)?;
        return Ok(1.0);
    }
    let nodes = offcenter_nodes(p.dimension(), c, r);
    let vals = nodes.iter().map(|&(d, _)| p.eval(d, 0)).collect::<Result<Vec<_>>>()?;
    let wsum: f64 = nodes.iter().map(|x| x.1).sum();
    let mean: f64 = nodes.iter().zip(&vals).map(|((_, w), u)| w * u).sum::<f64>() / wsum;
    let peak = vals.iter().map(|u| k * (u - mean)).fold(f64::NEG_INFINITY, f64::max);
    let acc: f64 = nodes.iter().zip(&vals).map(|((_, w), u)| w * (k * (u - mean) - peak).exp()).sum();
    Ok((peak + (acc / wsum).ln()).exp())
}

/// Volume average of `u` over the ball `B_radius(c e₁)`.
pub fn ball_mean(p: &RadialProfile, c: f64, radius: f64) -> Result<f64> {
    if !(c >= 0.0) || !(radius > 0.0) {
        return Err(invalid("ball_mean needs c >= 0 and radius > 0"));
    }
    let n = p.dimension();
    let mut breaks = vec![0.0, radius];
    if c > 0.0 && c < radius {
        breaks.insert(1, c);
    }
    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        for i in 0..4 {
            let a = w[0] + (w[1] - w[0]) * i as f64 / 4.0;
            panels.push((a, a + (w[1] - w[0]) / 4.0));
        }
    }
    let (x, wts) = reference_rule(24);
    let mut acc = 0.0;
    for (a, b) in panels {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(wts) {
            let rho = mid + half * xi;
            let mean = if c == 0.0 { p.eval(rho, 0)? } else { offcenter_radial_avg(n, |d| p.eval(d, 0), c, rho)? };
            acc += wi * half * rho.powi(n as i32 - 1) * mean;
        }
    }
    Ok(acc * n as f64 / radius.powi(n as i32))
}

/// Completeness of the metric as read off `α₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    /// `α₀ < 1`
    Complete,
    /// `α₀ > 1`
    Incomplete,
    /// `α₀ = 1` to within the threshold
    Indeterminate,
}

impl Completeness {
    pub fn from_alpha0(alpha0: f64) -> Self {
        const THRESHOLD: f64 = 1e-9;
        if (alpha0 - 1.0).abs() <= THRESHOLD {
            Completeness::Indeterminate
        } else if alpha0 < 1.0 {
            Completeness::Complete
        } else {
            Completeness::Incomplete
        }
    }
}

/// Volume-entropy estimate with the identity prediction `1 - α₀`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEntropy {
    pub estimate: LimitEstimate,
    pub alpha0: f64,
    pub prediction: f64,
    pub completeness: Completeness,
    /// Whether the identity applies, which requires a complete metric.
    pub identity_asserted: bool,
}

/// `log V_g(B_r)` at each radius, with `V_g(B_r) = |S^{n-1}| ∫₀^r e^{nu} s^{n-1} ds`.
pub fn log_conformal_volume(p: &RadialProfile, radii: &[f64]) -> Result<Vec<f64>> {
    let n = p.dimension();
    let nf = n as f64;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("volume radii must be positive"));
    }
    let inner = 1e-3f64.min(radii.iter().copied().fold(f64::INFINITY, f64::min) * 0.5);
    let mut breaks = vec![0.0];
    breaks.extend(log_points(inner, r_max, 16));
    breaks.extend_from_slice(radii);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * *b);
    let (x, w) = reference_rule(16);
    let panel_logs = breaks
        .par_windows(2)
        .map(|pw| {
            let (a, b) = (pw[0], pw[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut expo = Vec::with_capacity(x.len());
            for (xi, wi) in x.iter().zip(w) {
                let s = mid + half * xi;
                expo.push(nf * p.eval(s, 0)? + (nf - 1.0) * s.ln() + (wi * half).ln());
            }
            Ok(log_sum_exp(&expo))
        })
        .collect::<Result<Vec<f64>>>()?;
    let log_area = sphere_area(n - 1).ln();
    let mut running = f64::NEG_INFINITY;
    let mut next = 0;
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&i, &j| radii[i].total_cmp(&radii[j]));
    let mut result = vec![0.0; radii.len()];
    for (pi, pl) in panel_logs.iter().enumerate() {
        running = log_sum_exp(&[running, *pl]);
        let b = breaks[pi + 1];
        while next < order.len() && radii[order[next]] <= b * (1.0 + 1e-14) {
            result[order[next]] = running + log_area;
            next += 1;
        }
    }
    Ok(result)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `τ(g) = limsup log V_g(B_r) / log |B_r|` along the schedule.
pub fn volume_entropy(p: &RadialProfile, schedule: &Schedule) -> Result<VolumeEntropy> {
    let n = p.dimension();
    if schedule.radii.iter().any(|&r| ball_volume(n, r) <= 1.0) {
        return Err(invalid("volume entropy radii must have |B_r| > 1"));
    }
    let logs = log_conformal_volume(p, &schedule.radii)?;
    let values: Vec<f64> = logs.iter().zip(&schedule.radii).map(|(lv, &r)| lv / ball_volume(n, r).ln()).collect();
    let alpha0 = profile_alpha0(p)?;
    let completeness = Completeness::from_alpha0(alpha0);
    let estimate = LimitEstimate::limsup(schedule.radii.clone(), values, LimitScale::Log)?;
    let prediction = 1.0 - alpha0;
    let identity_asserted = completeness == Completeness::Complete;
    let estimate = if identity_asserted { estimate.with_prediction(prediction) } else { estimate };
    Ok(VolumeEntropy { estimate, alpha0, prediction, completeness, identity_asserted })
}

/// Conformal-mass estimate sampled over centers on one axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassEstimate {
    pub centers: Vec<f64>,
    pub per_center: Vec<LimitEstimate>,
    /// Smallest per-center limit.
    pub inf: f64,
    /// Error estimate of the minimizing center.
    pub inf_error: f64,
    /// `α₀ (2 - α₀)`.
    pub prediction: Option<f64>,
    pub converged: bool,
}

/// `r^{3-n} ∫_{∂B_r(c e₁)} R_g e^{2u} / ((n-1)(n-2) |S^{n-1}|)` at one radius.
pub fn mass_sample(p: &RadialProfile, c: f64, r: f64) -> Result<f64> {
    let n = p.dimension() as f64;
    let mean = offcenter_radial_avg(p.dimension(), |d| scalar_curvature_weighted(p, d), c, r)?;
    Ok(r * r * mean / ((n - 1.0) * (n - 2.0)))
}

pub fn conformal_mass(p: &RadialProfile, centers: &[f64], schedule: &Schedule) -> Result<MassEstimate> {
    if centers.is_empty() {
        return Err(invalid("conformal mass needs at least one center"));
    }
    let per_center = centers
        .par_iter()
        .map(|&c| LimitEstimate::sample(schedule, LimitScale::Power, |r| mass_sample(p, c, r)))
        .collect::<Result<Vec<_>>>()?;
    let prediction = profile_alpha0(p).ok().map(|a| a * (2.0 - a));
    let per_center: Vec<LimitEstimate> = per_center
        .into_iter()
        .map(|e| match prediction {
            Some(v) => e.with_prediction(v),
            None => e,
        })
        .collect();
    let best = per_center.iter().min_by(|a, b| a.limit.total_cmp(&b.limit)).unwrap();
    Ok(MassEstimate {
        centers: centers.to_vec(),
        inf: best.limit,
        inf_error: best.error,
        prediction,
        converged: per_center.iter().all(|e| e.converged),
        per_center,
    })
}

/// `-4/(n!|S^n|) ∫₀^∞ r Q'(r) e^{nu} |S^{n-1}| r^{n-1} dr`.
pub fn pohozaev_mass(q: &QFunction, p: &RadialProfile) -> Result<f64> {
    let n = p.dimension();
    let nf = n as f64;
    let (_, hi) = p.domain();
    if let QFunction::Constant(_) = q {
        return Ok(0.0);
    }
    let upper = q.effective_radius().map_or(hi, |r| r.min(hi));
    if !upper.is_finite() {
        return Err(invalid("pohozaev_mass needs a bounded integration range"));
    }
    let g = |r: f64| -> Result<f64> {
        let dq = q.derivative(r);
        if dq == 0.0 {
            return Ok(0.0);
        }
        Ok(r * dq * (nf * p.eval(r, 0)?).exp() * r.powi(n as i32 - 1))
    };
    let mut breaks = vec![0.0];
    breaks.extend(log_points(1e-3f64.min(upper * 0.5), upper, 32));
    let mut total = 0.0;
    let mut scale = 0.0f64;
    for w in breaks.windows(2) {
        let mut err = None;
        let part = gl_integrate(w[0], w[1], 24, |s| match g(s) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        scale = scale.max(part.abs());
        total += part;
    }
    let edge = (g(upper)? * upper).abs();
    if edge > 1e-10 * scale.max(f64::MIN_POSITIVE) && edge > 1e-300 {
        return Err(Error::TailNotConvergent {
            radius: upper,
            detail: format!("r Q' e^{{nu}} r^n at the truncation radius is {edge:e}"),
        });
    }
    Ok(-4.0 / (factorial(n) * sphere_area(n)) * sphere_area(n - 1) * total)
}

/// Spread of `u - potential(density(u))` over the radii; zero for normal profiles.
pub fn normality_defect(p: &RadialProfile, radii: &[f64]) -> Result<f64> {
    let f = density_from_profile(p)?;
    let pot = if f.total() == 0.0 && radii.iter().all(|&r| f.value(r) == 0.0) {
        None
    } else {
        Some(potential_from_density(&f, &PotentialConfig::default())?)
    };
    let diffs = radii
        .iter()
        .map(|&r| {
            let v = pot.as_ref().map_or(Ok(0.0), |q| q.eval(r, 0))?;
            Ok(p.eval(r, 0)? - v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = diffs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    Ok(hi - lo)
}

/// Smallest `r² R_g e^{2u}` over log-spaced radii in `[r0, r1]`; its sign is the sign
/// of the scalar curvature there.
pub fn min_weighted_scalar_curvature(p: &RadialProfile, r0: f64, r1: f64) -> Result<f64> {
    log_points(r0, r1, 8)
        .into_iter()
        .map(|r| Ok(r * r * scalar_curvature_weighted(p, r)?))
        .try_fold(f64::INFINITY, |m, v: Result<f64>| Ok(m.min(v?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha0_examples() {
        assert!((alpha0(&density_from_profile(&RadialProfile::sphere(4, 1.0).unwrap()).unwrap()) - 2.0).abs() < 1e-10);
        assert_eq!(alpha0(&CurvatureDensity::zero(4).unwrap()), 0.0);
        let cx = density_from_profile(&RadialProfile::counterexample(4, 1.5).unwrap()).unwrap();
        assert!((alpha0(&cx) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn constant_profile_has_trivial_limits() {
        let p = RadialProfile::constant(4, 2.0).unwrap();
        let l = sphere_mean_limits(&p, &Schedule::standard()).unwrap();
        assert_eq!(l.laplacian.limit, 0.0);
        assert_eq!(l.slope.limit, 0.0);
        assert_eq!(l.gradient.limit, 0.0);
        assert!((exp_mean_ratio(&p, 3.0, 4.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ball_mean(&p, 7.0, 1.0).unwrap() - 2.0).abs() < 1e-13);
        let m = conformal_mass(&p, &[0.0, 1.0], &Schedule::standard()).unwrap();
        assert_eq!(m.inf, 0.0);
    }

    #[test]
    fn sphere_profile_mean_limits() {
        let p = RadialProfile::sphere(4, 1.0).unwrap();
        let l = sphere_mean_limits(&p, &Schedule::standard()).unwrap();
        assert!(l.laplacian.within(4.0, 1e-6));
        assert!(l.slope.within(-2.0, 1e-6));
        assert!(l.gradient.within(4.0, 1e-6));
    }

    #[test]
    fn ball_mean_of_quadratic() {
        let p = RadialProfile::quadratic(4, 1.0).unwrap();
        assert!((ball_mean(&p, 0.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-13);
        // |y|² averaged over B₁(c e₁) is c² + n/(n+2).
        assert!((ball_mean(&p, 0.5, 1.0).unwrap() - (0.25 + 2.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn radial_exp_mean_is_one() {
        let p = RadialProfile::sphere(4, 1.0).unwrap();
        assert_eq!(exp_mean_ratio(&p, 0.0, 4.0, 10.0).unwrap(), 1.0);
        let v = exp_mean_ratio(&p, 1.0, 4.0, 1e3).unwrap();
        assert!((1.0..=1.01).contains(&v), "{v}");
    }

    #[test]
    fn flat_volume_entropy_is_one() {
        let p = RadialProfile::constant(4, 0.0).unwrap();
        let s = Schedule::geometric(100.0, 10f64.powf(0.25), 9).unwrap();
        let v = volume_entropy(&p, &s).unwrap();
        assert!((v.estimate.limit - 1.0).abs() < 1e-10);
        assert_eq!(v.completeness, Completeness::Complete);
    }

    #[test]
    fn sphere_volume_entropy_is_zero_and_not_asserted() {
        let p = RadialProfile::sphere(4, 1.0).unwrap();
        let s = Schedule::geometric(100.0, 10f64.powf(0.25), 9).unwrap();
        let v = volume_entropy(&p, &s).unwrap();
        assert!(v.estimate.limit.abs() < 0.05, "{}", v.estimate.limit);
        assert!(!v.identity_asserted);
        assert_eq!(v.completeness, Completeness::Incomplete);
        let total = log_conformal_volume(&p, &[1e4]).unwrap()[0].exp();
        assert!((total / (8.0 * std::f64::consts::PI.powi(2) / 3.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_mass_vanishes() {
        let p = RadialProfile::sphere(4, 2.0).unwrap();
        let m = conformal_mass(&p, &[0.0, 1.0, 2.0], &Schedule::standard()).unwrap();
        assert!(m.inf.abs() < 1e-2);
    }

    #[test]
    fn completeness_threshold() {
        assert_eq!(Completeness::from_alpha0(1.0), Completeness::Indeterminate);
        assert_eq!(Completeness::from_alpha0(0.5), Completeness::Complete);
        assert_eq!(Completeness::from_alpha0(2.0), Completeness::Incomplete);
    }

    #[test]
    fn pohozaev_of_constant_q_is_zero() {
        let p = RadialProfile::sphere(4, 1.0).unwrap();
        assert_eq!(pohozaev_mass(&QFunction::Constant(6.0), &p).unwrap(), 0.0);
    }
}
