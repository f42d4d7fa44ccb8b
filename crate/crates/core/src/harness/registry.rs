//! The check registry. Each entry maps a stable id to the identity it tests and a
//! function producing one or more outcomes.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::SuiteConfig;
use super::oracles::{f4_closed_form, f4_monte_carlo};
use super::report::Expected;
use crate::calculus::{polyharmonic, q_curvature};
use crate::catalog::{DensitySpec, ProfileSpec};
use crate::constants::{factorial, sphere_area};
use crate::endmodel::{end_limits, end_nu, EndProfile, HTerm};
use crate::error::{Error, Result};
use crate::functionals::{
    ball_mean, conformal_mass, exp_mean_ratio, min_weighted_scalar_curvature, normality_defect, pohozaev_mass,
    profile_alpha0, sphere_mean_limits, volume_entropy,
};
use crate::kernels::{angular_log_avg, angular_pow_avg};
use crate::limits::{LimitEstimate, LimitScale, Schedule};
use crate::potential::{picard_solve, potential_from_density, PicardState, PotentialConfig, QFunction};
use crate::profiles::{density_from_profile, CurvatureDensity, RadialProfile};
use crate::quadrature::{gl_integrate, integrate_to_infinity, log_points};

/// One measured quantity produced by a check.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Appended to the check id as `id[suffix]`.
    pub suffix: Option<String>,
    pub expected: Expected,
    pub measured: f64,
    /// Tolerance family in the config; `None` when `tol` is derived from the data.
    pub family: Option<&'static str>,
    pub tol: Option<f64>,
    /// Consulted only for divergent expectations.
    pub converged: bool,
    pub informational: bool,
    pub detail: String,
}

impl Outcome {
    pub fn point(value: f64, measured: f64, family: &'static str) -> Self {
        Self::new(Expected::Point { value }, measured, Some(family))
    }
    pub fn interval(lo: f64, hi: f64, measured: f64, family: &'static str) -> Self {
        Self::new(Expected::Interval { lo, hi }, measured, Some(family))
    }
    /// A yes/no outcome encoded as `1.0` or `0.0`, compared without tolerance.
    pub fn flag(expected: bool, measured: bool) -> Self {
        let enc = |b: bool| if b { 1.0 } else { 0.0 };
        Self { tol: Some(0.0), ..Self::new(Expected::Point { value: enc(expected) }, enc(measured), None) }
    }
    /// Passes iff the estimator reports non-convergence.
    pub fn divergent(measured: f64, converged: bool) -> Self {
        Self { converged, tol: Some(0.0), ..Self::new(Expected::Divergent, measured, None) }
    }
    fn new(expected: Expected, measured: f64, family: Option<&'static str>) -> Self {
        Self {
            suffix: None,
            expected,
            measured,
            family,
            tol: None,
            converged: true,
            informational: false,
            detail: String::new(),
        }
    }
    pub fn at(mut self, suffix: impl Into<String>) -> Self {
        self.suffix = Some(suffix.into());
        self
    }
    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }
    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

pub type CheckFn = fn(&Context) -> Result<Vec<Outcome>>;

pub struct Check {
    pub id: &'static str,
    /// The identity or bound being tested, in formula form.
    pub anchor: &'static str,
    pub run: CheckFn,
}

/// Profiles shared by several checks, built once before the checks run.
pub struct Context {
    pub cfg: SuiteConfig,
    profiles: HashMap<String, std::result::Result<Arc<RadialProfile>, String>>,
    picard: std::result::Result<(Arc<RadialProfile>, PicardState), String>,
}

fn reference_bump() -> ProfileSpec {
    ProfileSpec::Potential { density: DensitySpec::Bump { alpha0: 0.5, radius: 2.0, power: 4, n: 4 }, constant: 0.0 }
}

fn reference_q() -> QFunction {
    QFunction::Gaussian { amplitude: 0.1, width: 1.0 }
}

const SPHERE_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

impl Context {
    pub fn new(cfg: SuiteConfig) -> Self {
        let mut specs = cfg.roster.clone();
        specs.push(reference_bump());
        specs.extend(SPHERE_LAMBDAS.iter().map(|&lambda| ProfileSpec::Sphere { lambda, n: 4 }));
        let mut seen = std::collections::HashSet::new();
        specs.retain(|s| seen.insert(s.label()));
        let (profiles, picard) = rayon::join(
            || {
                specs
                    .par_iter()
                    .map(|s| (s.label(), s.build().map(Arc::new).map_err(|e| e.to_string())))
                    .collect::<HashMap<_, _>>()
            },
            || {
                let u0 = RadialProfile::constant(4, 0.0).map_err(|e| e.to_string())?;
                picard_solve(&reference_q(), &u0, &PotentialConfig::default(), 0.5, 1e-10)
                    .map(|(p, st)| (Arc::new(p), st))
                    .map_err(|e| e.to_string())
            },
        );
        Self { cfg, profiles, picard }
    }

    pub fn profile(&self, spec: &ProfileSpec) -> Result<Arc<RadialProfile>> {
        match self.profiles.get(&spec.label()) {
            Some(Ok(p)) => Ok(p.clone()),
            Some(Err(e)) => Err(Error::Config(format!("{}: {e}", spec.label()))),
            None => Ok(Arc::new(spec.build()?)),
        }
    }

    fn picard(&self) -> Result<&(Arc<RadialProfile>, PicardState)> {
        self.picard.as_ref().map_err(|e| Error::Config(format!("Picard reference solve: {e}")))
    }

    pub fn tolerance(&self, family: &str) -> f64 {
        self.cfg.tolerance(family)
    }

    fn schedule(&self, radii: &[f64]) -> Result<Schedule> {
        Schedule::new(radii.to_vec())
    }
}

/// Every registered check, in report order.
pub fn registry() -> &'static [Check] {
    const CHECKS: &[Check] = &[
        Check { id: "kernel.lieb_loss", anchor: "avg_{|x|=r} |x-y|^{2-n} = min{r^{2-n}, |y|^{2-n}}", run: lieb_loss },
        Check { id: "kernel.mean_value_bound", anchor: "avg_{|x|=r} (|y|/|x-y|)^k <= 1, 1 <= k <= n-2", run: mean_value_bound },
        Check { id: "kernel.f4_closed_form", anchor: "F4(r,s) = log max + min^2/(4 max^2)", run: f4_closed },
        Check { id: "kernel.f4_monte_carlo", anchor: "F4 closed form vs seeded Monte Carlo mean", run: f4_mc },
        Check { id: "curvature.sphere_q", anchor: "Q = (n-1)! for the round sphere", run: sphere_q },
        Check { id: "curvature.sphere_volume", anchor: "int e^{nu} = |S^n|", run: sphere_volume },
        Check { id: "curvature.sphere_alpha0", anchor: "alpha0 = 2 for the round sphere", run: sphere_alpha0 },
        Check { id: "curvature.counterexample_mass", anchor: "int (-Delta)^{n/2} u = (n-1)! |S^n| beta", run: counterexample_mass },
        Check { id: "potential.sphere_roundtrip", anchor: "u = P[(-Delta)^{n/2} u] + C for the sphere", run: sphere_roundtrip },
        Check { id: "asymptotic.laplacian", anchor: "r^2 avg(-Delta u) -> (n-2) alpha0", run: asymptotic_laplacian },
        Check { id: "asymptotic.slope", anchor: "r u'(r) -> -alpha0", run: asymptotic_slope },
        Check { id: "asymptotic.gradient", anchor: "r^2 avg|grad u|^2 -> alpha0^2", run: asymptotic_gradient },
        Check { id: "asymptotic.log_ratio", anchor: "u(r) = (-alpha0 + o(1)) log r", run: asymptotic_log_ratio },
        Check { id: "asymptotic.ball_mean", anchor: "avg_{B_1(x)} u = (-alpha0 + o(1)) log|x|", run: asymptotic_ball_mean },
        Check { id: "mass.identity", anchor: "m_c(g) = alpha0 (2 - alpha0)", run: mass_identity },
        Check { id: "mass.center_independence", anchor: "m_c(g) does not depend on the center", run: mass_centers },
        Check { id: "mass.sphere", anchor: "m_c(g) = 0 for the round sphere", run: mass_sphere },
        Check { id: "entropy.potential", anchor: "tau(g) = 1 - alpha0 for complete normal metrics", run: entropy_potential },
        Check { id: "entropy.sphere", anchor: "tau(g) = 0 for the round sphere", run: entropy_sphere },
        Check { id: "entropy.sphere_flag", anchor: "alpha0 > 1: incomplete, identity not asserted", run: entropy_flag },
        Check { id: "picard.residual", anchor: "(-Delta)^{n/2} u = Q e^{nu}, fixed-point residual", run: picard_residual },
        Check { id: "picard.q_match", anchor: "Q_g of the solution equals the prescribed Q", run: picard_q_match },
        Check { id: "picard.pohozaev", anchor: "m_c(g) = -4/(n!|S^n|) int x.grad Q e^{nu}", run: picard_pohozaev },
        Check { id: "end.flat", anchor: "lim I_g = 1 for the flat end", run: end_flat },
        Check { id: "end.pure_log", anchor: "lim I_g = 0 for w = -log r", run: end_pure_log },
        Check { id: "end.compact", anchor: "lim I_g = 1 + alpha1 - alpha2", run: end_compact },
        Check { id: "end.consistency", anchor: "lim I_g = lim (1 + r w'(r))", run: end_consistency },
        Check { id: "end.range", anchor: "R_g >= 0: 0 <= lim I_g <= 1; R_g >= C > 0: lim I_g = 0", run: end_range },
        Check { id: "roster.sign_regime", anchor: "R_g >= 0 near infinity implies 0 <= alpha0 <= 2", run: roster_sign },
        Check { id: "roster.mass", anchor: "normal iff m_c(g) > -inf; then m_c = alpha0 (2 - alpha0)", run: roster_mass },
        Check { id: "jensen.randomized", anchor: "avg e^{ku} >= e^{k avg u}", run: jensen },
    ];
    CHECKS
}

pub fn check_ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

fn log_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| 0.1 * 100f64.powf(i as f64 / (count - 1) as f64)).collect()
}

fn lieb_loss(ctx: &Context) -> Result<Vec<Outcome>> {
    let grid = log_grid(20);
    ctx.cfg
        .dimensions
        .iter()
        .map(|&n| {
            let mut worst: f64 = 0.0;
            for &r in &grid {
                for &s in &grid {
                    let v = angular_pow_avg(n, r, s, (n - 2) as f64)?;
                    worst = worst.max((v - r.max(s).powi(2 - n as i32)).abs());
                }
            }
            Ok(Outcome::point(0.0, worst, "kernel_exact").at(format!("n={n}")).detail("max abs error on the 20x20 grid"))
        })
        .collect()
}

fn mean_value_bound(ctx: &Context) -> Result<Vec<Outcome>> {
    let grid = log_grid(20);
    ctx.cfg
        .dimensions
        .iter()
        .map(|&n| {
            let mut worst = f64::NEG_INFINITY;
            for k in 1..=n - 2 {
                for &r in &grid {
                    for &s in &grid {
                        worst = worst.max(s.powi(k as i32) * angular_pow_avg(n, r, s, k as f64)?);
                    }
                }
            }
            Ok(Outcome::interval(f64::NEG_INFINITY, 1.0, worst, "kernel_bound").at(format!("n={n}")))
        })
        .collect()
}

fn f4_closed(_: &Context) -> Result<Vec<Outcome>> {
    let grid = log_grid(20);
    let mut worst: f64 = 0.0;
    for &r in &grid {
        for &s in &grid {
            worst = worst.max((angular_log_avg(4, r, s)? - f4_closed_form(r, s)).abs());
        }
    }
    Ok(vec![Outcome::point(0.0, worst, "f4_closed_form")])
}

fn f4_mc(ctx: &Context) -> Result<Vec<Outcome>> {
    let pairs = [(0.5, 1.0), (1.0, 2.0), (3.0, 0.8), (1.0, 1.0)];
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, &(r, s))| {
            let (mean, se) = f4_monte_carlo(r, s, ctx.cfg.monte_carlo_samples, ctx.cfg.seed.wrapping_add(i as u64));
            let closed = f4_closed_form(r, s);
            Outcome::point(0.0, (mean - closed).abs() / se, "monte_carlo_sigma")
                .at(format!("r={r},s={s}"))
                .detail(format!("mean {mean:.8} closed {closed:.8} stderr {se:.2e}"))
        })
        .collect())
}

fn sphere_q(ctx: &Context) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for &n in &ctx.cfg.dimensions {
        for lambda in SPHERE_LAMBDAS {
            let p = RadialProfile::sphere(n, lambda)?;
            let want = factorial(n - 1);
            let mut worst: f64 = 0.0;
            for i in 0..=200 {
                worst = worst.max((q_curvature(&p, 0.05 * i as f64)? - want).abs());
            }
            out.push(Outcome::point(0.0, worst, "sphere_q").at(format!("n={n},lambda={lambda}")));
        }
    }
    Ok(out)
}

fn sphere_volume(ctx: &Context) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for &n in &ctx.cfg.dimensions {
        for lambda in SPHERE_LAMBDAS {
            let p = RadialProfile::sphere(n, lambda)?;
            let nf = n as f64;
            let mut err = None;
            let vol = integrate_to_infinity(
                |r| match p.eval(r, 0) {
                    Ok(u) => (nf * u).exp() * r.powi(n as i32 - 1),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                lambda,
                1e-13,
                1e12,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            let vol = sphere_area(n - 1) * vol.value;
            let want = sphere_area(n);
            out.push(
                Outcome::point(0.0, (vol / want - 1.0).abs(), "sphere_volume_rel")
                    .at(format!("n={n},lambda={lambda}"))
                    .detail(format!("volume {vol:.12} vs {want:.12}")),
            );
        }
    }
    Ok(out)
}

fn sphere_alpha0(ctx: &Context) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for &n in &ctx.cfg.dimensions {
        for lambda in SPHERE_LAMBDAS {
            let a = profile_alpha0(&RadialProfile::sphere(n, lambda)?)?;
            out.push(Outcome::point(2.0, a, "sphere_alpha0").at(format!("n={n},lambda={lambda}")));
        }
    }
    Ok(out)
}

/// `|S^{n-1}| ∫₀^R (-Δ)^{n/2} u r^{n-1} dr`.
fn ball_q_mass(p: &RadialProfile, radius: f64) -> Result<f64> {
    let n = p.dimension();
    let mut breaks = vec![0.0];
    breaks.extend(log_points(1e-3, radius, 16));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let mut err = None;
        total += gl_integrate(w[0], w[1], 24, |r| match polyharmonic(p, r, n / 2) {
            Ok(v) => v * r.powi(n as i32 - 1),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(sphere_area(n - 1) * total)
}

fn counterexample_mass(ctx: &Context) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for &n in &ctx.cfg.dimensions {
        for beta in [-1.0, 1.0, 2.0] {
            let p = RadialProfile::counterexample(n, beta)?;
            let got = ball_q_mass(&p, 50.0)?;
            let want = factorial(n - 1) * sphere_area(n) * beta;
            out.push(
                Outcome::point(0.0, (got / want - 1.0).abs(), "counterexample_rel")
                    .at(format!("n={n},beta={beta}"))
                    .detail(format!("{got:.6} vs {want:.6}")),
            );
        }
    }
    Ok(out)
}

fn sphere_roundtrip(ctx: &Context) -> Result<Vec<Outcome>> {
    ctx.cfg
        .dimensions
        .par_iter()
        .map(|&n| {
            let s = RadialProfile::sphere(n, 1.0)?;
            let v = potential_from_density(&density_from_profile(&s)?, &PotentialConfig::default())?;
            let shift = s.eval(0.0, 0)? - v.eval(0.0, 0)?;
            let mut worst: f64 = 0.0;
            for i in 0..=500 {
                let r = 0.1 * i as f64;
                worst = worst.max((s.eval(r, 0)? - v.eval(r, 0)? - shift).abs());
            }
            Ok(Outcome::point(0.0, worst, "roundtrip").at(format!("n={n}")).detail(format!("constant {shift:.12}")))
        })
        .collect()
}

fn rel_point(value: f64, est: &LimitEstimate, ctx: &Context, family: &'static str) -> Outcome {
    Outcome::point(value, est.limit, family)
        .tol(ctx.tolerance(family) * value.abs())
        .detail(format!("error estimate {:.2e}, converged {}", est.error, est.converged))
}

fn bump_mean_limits(ctx: &Context) -> Result<crate::functionals::MeanLimits> {
    let u = ctx.profile(&reference_bump())?;
    sphere_mean_limits(&u, &ctx.schedule(&ctx.cfg.schedules.asymptotic)?)
}

fn asymptotic_laplacian(ctx: &Context) -> Result<Vec<Outcome>> {
    Ok(vec![rel_point(1.0, &bump_mean_limits(ctx)?.laplacian, ctx, "asymptotic_rel")])
}

fn asymptotic_slope(ctx: &Context) -> Result<Vec<Outcome>> {
    Ok(vec![rel_point(-0.5, &bump_mean_limits(ctx)?.slope, ctx, "asymptotic_rel")])
}

fn asymptotic_gradient(ctx: &Context) -> Result<Vec<Outcome>> {
    Ok(vec![rel_point(0.25, &bump_mean_limits(ctx)?.gradient, ctx, "asymptotic_rel")])
}

fn asymptotic_log_ratio(ctx: &Context) -> Result<Vec<Outcome>> {
    Ok(vec![rel_point(-0.5, &bump_mean_limits(ctx)?.log_ratio, ctx, "asymptotic_rel")])
}

fn asymptotic_ball_mean(ctx: &Context) -> Result<Vec<Outcome>> {
    let u = ctx.profile(&reference_bump())?;
    let est = LimitEstimate::sample(&ctx.schedule(&ctx.cfg.schedules.asymptotic)?, LimitScale::Log, |r| {
        Ok(ball_mean(&u, r, 1.0)? / r.ln())
    })?;
    Ok(vec![rel_point(-0.5, &est, ctx, "ball_mean_rel")])
}

fn bump_mass(ctx: &Context) -> Result<crate::functionals::MassEstimate> {
    let u = ctx.profile(&reference_bump())?;
    conformal_mass(&u, &ctx.cfg.centers, &ctx.schedule(&ctx.cfg.schedules.asymptotic)?)
}

fn mass_identity(ctx: &Context) -> Result<Vec<Outcome>> {
    let m = bump_mass(ctx)?;
    let mut out: Vec<Outcome> = m
        .centers
        .iter()
        .zip(&m.per_center)
        .map(|(c, e)| {
            Outcome::point(0.75, e.limit, "mass").at(format!("c={c}")).detail(format!("error estimate {:.2e}", e.error))
        })
        .collect();
    out.push(Outcome::point(0.75, m.inf, "mass").at("inf").detail(format!("error estimate {:.2e}", m.inf_error)));
    Ok(out)
}

fn mass_centers(ctx: &Context) -> Result<Vec<Outcome>> {
    let m = bump_mass(ctx)?;
    let mut spread: f64 = 0.0;
    let mut tol = f64::INFINITY;
    for (i, a) in m.per_center.iter().enumerate() {
        for b in &m.per_center[i + 1..] {
            spread = spread.max((a.limit - b.limit).abs());
            tol = tol.min(2.0 * a.error.max(b.error));
        }
    }
    if !tol.is_finite() {
        tol = 0.0;
    }
    Ok(vec![Outcome::point(0.0, spread, "mass").tol(tol).detail("largest pairwise difference of per-center limits")])
}

fn mass_sphere(ctx: &Context) -> Result<Vec<Outcome>> {
    let schedule = ctx.schedule(&ctx.cfg.schedules.asymptotic)?;
    SPHERE_LAMBDAS
        .iter()
        .map(|&lambda| {
            let p = ctx.profile(&ProfileSpec::Sphere { lambda, n: 4 })?;
            let m = conformal_mass(&p, &ctx.cfg.centers, &schedule)?;
            Ok(Outcome::point(0.0, m.inf, "mass").at(format!("lambda={lambda}")))
        })
        .collect()
}

fn entropy_potential(ctx: &Context) -> Result<Vec<Outcome>> {
    let u = ctx.profile(&reference_bump())?;
    let v = volume_entropy(&u, &ctx.schedule(&ctx.cfg.schedules.entropy)?)?;
    Ok(vec![Outcome::point(0.5, v.estimate.limit, "entropy")
        .detail(format!("error estimate {:.2e}, identity asserted {}", v.estimate.error, v.identity_asserted))])
}

fn sphere_entropy(ctx: &Context) -> Result<crate::functionals::VolumeEntropy> {
    let p = ctx.profile(&ProfileSpec::Sphere { lambda: 1.0, n: 4 })?;
    volume_entropy(&p, &ctx.schedule(&ctx.cfg.schedules.entropy)?)
}

fn entropy_sphere(ctx: &Context) -> Result<Vec<Outcome>> {
    let v = sphere_entropy(ctx)?;
    Ok(vec![Outcome::point(0.0, v.estimate.limit, "entropy")])
}

fn entropy_flag(ctx: &Context) -> Result<Vec<Outcome>> {
    let v = sphere_entropy(ctx)?;
    Ok(vec![Outcome::flag(false, v.identity_asserted)
        .detail(format!("completeness {:?}, alpha0 {:.6}", v.completeness, v.alpha0))])
}

fn picard_residual(ctx: &Context) -> Result<Vec<Outcome>> {
    let (_, st) = ctx.picard()?;
    Ok(vec![Outcome::point(0.0, st.residual, "picard_residual")
        .detail(format!("{} iterations, damping {}", st.iterations, st.damping))])
}

fn picard_q_match(ctx: &Context) -> Result<Vec<Outcome>> {
    let (p, _) = ctx.picard()?;
    let q = reference_q();
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        worst = worst.max((q_curvature(p, r)? - q.value(r)).abs());
    }
    Ok(vec![Outcome::point(0.0, worst, "picard_q")])
}

fn picard_pohozaev(ctx: &Context) -> Result<Vec<Outcome>> {
    let (p, _) = ctx.picard()?;
    let poh = pohozaev_mass(&reference_q(), p)?;
    let m = conformal_mass(p, &ctx.cfg.centers, &ctx.schedule(&ctx.cfg.schedules.asymptotic)?)?;
    Ok(vec![Outcome::point(0.0, ((poh - m.inf) / m.inf).abs(), "pohozaev_rel")
        .detail(format!("Pohozaev {poh:.8}, mass {:.8}", m.inf))])
}

fn compact_end() -> Result<EndProfile> {
    EndProfile::new(CurvatureDensity::shell(4, 0.5, 1.0, 3.0, 4)?, 0.0, HTerm::Zero, &PotentialConfig::default())
}

fn end_schedule(ctx: &Context) -> Result<Schedule> {
    ctx.schedule(&ctx.cfg.schedules.end)
}

fn end_flat(ctx: &Context) -> Result<Vec<Outcome>> {
    let nu = end_nu(&EndProfile::without_density(0.0, HTerm::Zero)?, &end_schedule(ctx)?)?;
    Ok(vec![Outcome::point(1.0, nu.estimate.limit, "end_flat")])
}

fn end_pure_log(ctx: &Context) -> Result<Vec<Outcome>> {
    let nu = end_nu(&EndProfile::without_density(-1.0, HTerm::Zero)?, &end_schedule(ctx)?)?;
    Ok(vec![Outcome::point(0.0, nu.estimate.limit, "end_log")])
}

fn end_compact(ctx: &Context) -> Result<Vec<Outcome>> {
    let nu = end_nu(&compact_end()?, &end_schedule(ctx)?)?;
    Ok(vec![Outcome::point(0.5, nu.estimate.limit, "end_compact").detail(format!("error estimate {:.2e}", nu.estimate.error))])
}

fn end_consistency(ctx: &Context) -> Result<Vec<Outcome>> {
    let e = compact_end()?;
    let s = end_schedule(ctx)?;
    let nu = end_nu(&e, &s)?;
    let b = end_limits(&e, &s)?.b;
    let gap = (nu.estimate.limit - (1.0 + b.limit)).abs();
    Ok(vec![Outcome::point(0.0, gap, "end_compact")
        .tol(nu.estimate.error + b.error)
        .detail("tolerance is the sum of both error estimates")])
}

fn end_range(ctx: &Context) -> Result<Vec<Outcome>> {
    let s = end_schedule(ctx)?;
    let ends = [
        ("flat", EndProfile::without_density(0.0, HTerm::Zero)?),
        ("pure_log", EndProfile::without_density(-1.0, HTerm::Zero)?),
        ("compact", compact_end()?),
    ];
    ends.iter()
        .map(|(name, e)| {
            let nu = end_nu(e, &s)?;
            Ok(Outcome::flag(true, nu.range_ok).at(*name).detail(format!(
                "limit {:.6}, R_g >= 0: {}, R_g bounded below: {}",
                nu.estimate.limit, nu.scalar_nonnegative, nu.scalar_bounded_below
            )))
        })
        .collect()
}

fn roster_sign(ctx: &Context) -> Result<Vec<Outcome>> {
    let eps = ctx.tolerance("sign_eps");
    ctx.cfg
        .roster
        .par_iter()
        .map(|spec| {
            let label = spec.label();
            let p = ctx.profile(spec)?;
            let min = min_weighted_scalar_curvature(&p, 10.0, 1e3)?;
            let a = profile_alpha0(&p)?;
            let o = Outcome::interval(0.0, 2.0, a, "sign_eps").tol(eps).at(label);
            Ok(if min >= 0.0 {
                o.detail(format!("min r^2 R_g e^(2u) on [10, 1e3] = {min:.3e}"))
            } else {
                o.informational().detail(format!("R_g < 0 outside r = 10 (min {min:.3e}); not applicable"))
            })
        })
        .collect()
}

fn roster_mass(ctx: &Context) -> Result<Vec<Outcome>> {
    let schedule = ctx.schedule(&ctx.cfg.schedules.asymptotic)?;
    let probe = log_points(0.5, 50.0, 4);
    ctx.cfg
        .roster
        .par_iter()
        .map(|spec| {
            let label = spec.label();
            let p = ctx.profile(spec)?;
            let defect = match p.potential() {
                Some(_) => 0.0,
                None => normality_defect(&p, &probe)?,
            };
            let m = conformal_mass(&p, &ctx.cfg.centers, &schedule)?;
            if defect <= 1e-4 {
                let a = profile_alpha0(&p)?;
                Ok(Outcome::point(a * (2.0 - a), m.inf, "mass")
                    .at(label)
                    .detail(format!("normal, alpha0 {a:.6}, error estimate {:.2e}", m.inf_error)))
            } else {
                Ok(Outcome::divergent(m.inf, m.converged)
                    .at(label)
                    .detail(format!("not normal (defect {defect:.3e}); mass estimate must not converge")))
            }
        })
        .collect()
}

fn jensen(ctx: &Context) -> Result<Vec<Outcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let bump = ctx.profile(&reference_bump())?;
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    for _ in 0..200 {
        let which = rng.random_range(0..3);
        let p: Arc<RadialProfile> = match which {
            0 => Arc::new(RadialProfile::sphere(4, rng.random_range(0.3..3.0))?),
            1 => Arc::new(RadialProfile::counterexample(4, rng.random_range(-2.0..2.0))?),
            _ => bump.clone(),
        };
        let c = rng.random_range(0.0..5.0);
        let k = rng.random_range(-4.0..4.0);
        let r = 10f64.powf(rng.random_range(-1.0..2.0));
        let v = exp_mean_ratio(&p, c, k, r)?;
        if v < worst {
            worst = v;
            at = format!("{} c={c:.3} k={k:.3} r={r:.3}", p.label());
        }
    }
    Ok(vec![Outcome::interval(1.0, f64::INFINITY, worst, "jensen").detail(format!("smallest ratio at {at}"))])
}
