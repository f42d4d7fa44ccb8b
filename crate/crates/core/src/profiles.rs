//! Radial conformal factors `u(r)` and the curvature densities `Q e^{nu}` they carry.
//!
//! Closed-form families are stored as sums of terms in `ρ = r²`
//! (`c`, `a ρ`, `b log(d + ρ)`). Every derivative in `ρ` is exact, and the
//! `r`-derivatives follow from Faà di Bruno's formula for `ρ = r²`, so odd
//! derivatives at the origin vanish identically.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::calculus;
use crate::constants::{alpha_normalization, check_dimension, sphere_area};
use crate::error::{invalid, Error, Result};
use crate::interp::CubicSpline;
use crate::kernels::MAX_JET;
use crate::potential::PotentialProfile;
use crate::quadrature::{gl_integrate, integrate_to_infinity};

/// Highest derivative order carried by closed-form profiles.
pub const CLOSED_FORM_ORDER: usize = MAX_JET - 1;

/// One term of a closed-form profile, as a function of `ρ = r²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Term {
    /// `c`
    Const(f64),
    /// `a ρ = a r²`
    Quadratic(f64),
    /// `coef · log(shift + ρ)`; `shift = 0` gives `2 coef log r`.
    LogShift { coef: f64, shift: f64 },
}

impl Term {
    fn add_rho_jet(&self, rho: f64, out: &mut [f64]) -> Result<()> {
        match *self {
            Term::Const(c) => out[0] += c,
            Term::Quadratic(a) => {
                out[0] += a * rho;
                if out.len() > 1 {
                    out[1] += a;
                }
            }
            Term::LogShift { coef, shift } => {
                let x = shift + rho;
                if !(x > 0.0) {
                    return Err(invalid("logarithmic term is singular at the origin"));
                }
                out[0] += coef * x.ln();
                let inv = 1.0 / x;
                let mut p = inv;
                let mut fact = 1.0;
                for (k, slot) in out.iter_mut().enumerate().skip(1) {
                    if k > 1 {
                        fact *= (k - 1) as f64;
                    }
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *slot += coef * sign * fact * p;
                    p *= inv;
                }
            }
        }
        Ok(())
    }

    fn scaled(&self, a: f64) -> Term {
        match *self {
            Term::Const(c) => Term::Const(a * c),
            Term::Quadratic(q) => Term::Quadratic(a * q),
            Term::LogShift { coef, shift } => Term::LogShift { coef: a * coef, shift },
        }
    }
}

/// A closed-form radial function `Σ terms(r²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ClosedForm {
    pub terms: Vec<Term>,
}

impl ClosedForm {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    /// `[U, U', …, U^{(order)}]` in the variable `ρ`.
    pub fn rho_jet(&self, rho: f64, order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; order + 1];
        for t in &self.terms {
            t.add_rho_jet(rho, &mut out)?;
        }
        Ok(out)
    }

    /// `[u, u', …, u^{(order)}]` in `r`.
    pub fn r_jet(&self, r: f64, order: usize) -> Result<Vec<f64>> {
        let rho_jet = self.rho_jet(r * r, order)?;
        Ok(rho_to_r_jet(&rho_jet, r))
    }

    pub fn linear_combination(parts: &[(f64, &ClosedForm)]) -> ClosedForm {
        let terms = parts
            .iter()
            .flat_map(|(a, cf)| cf.terms.iter().map(move |t| t.scaled(*a)))
            .collect();
        ClosedForm { terms }
    }

    fn singular_at_origin(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::LogShift { shift, .. } if *shift <= 0.0))
    }
}

/// `d^k/dr^k U(r²) = Σ_m k!/(m!(k-2m)!) (2r)^{k-2m} U^{(k-m)}(r²)`.
fn rho_to_r_jet(rho_jet: &[f64], r: f64) -> Vec<f64> {
    let order = rho_jet.len() - 1;
    let mut out = vec![0.0; order + 1];
    let two_r = 2.0 * r;
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in 0..=k / 2 {
            let coeff = binomial_like(k, m);
            acc += coeff * two_r.powi((k - 2 * m) as i32) * rho_jet[k - m];
        }
        *slot = acc;
    }
    out
}

/// `k! / (m! (k-2m)!)`.
fn binomial_like(k: usize, m: usize) -> f64 {
    let mut v = 1.0;
    for i in 1..=k {
        v *= i as f64;
    }
    for i in 1..=m {
        v /= i as f64;
    }
    for i in 1..=(k - 2 * m) {
        v /= i as f64;
    }
    v
}

/// A conformal factor sampled on a log-spaced grid and interpolated by a cubic
/// spline in `log r`. Only `u`, `u'` and `u''` are available.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    spline: CubicSpline,
    r_min: f64,
    r_max: f64,
    error_bound: f64,
}

impl SampledProfile {
    pub const ORDER: usize = 2;

    pub fn from_samples(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 5 {
            return Err(invalid("sampled profile needs at least five samples"));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(invalid("sampled profile radii must be positive"));
        }
        let r_min = radii[0];
        let r_max = *radii.last().unwrap();
        let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        // A-posteriori bound: spline through every other sample, checked at the rest.
        let (xe, ye): (Vec<f64>, Vec<f64>) = x
            .iter()
            .zip(&values)
            .enumerate()
            .filter(|(i, _)| i % 2 == 0 || *i == x.len() - 1)
            .map(|(_, (a, b))| (*a, *b))
            .unzip();
        let coarse = CubicSpline::new(xe, ye)?;
        let mut error_bound: f64 = 0.0;
        for i in (1..x.len() - 1).step_by(2) {
            error_bound = error_bound.max((coarse.eval(x[i])?[0] - values[i]).abs());
        }
        let spline = CubicSpline::new(x, values)?;
        Ok(Self { spline, r_min, r_max, error_bound })
    }

    pub fn from_fn(r_min: f64, r_max: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || count < 5 {
            return Err(invalid("bad sampling range"));
        }
        let radii: Vec<f64> = (0..count)
            .map(|i| r_min * (r_max / r_min).powf(i as f64 / (count - 1) as f64))
            .collect();
        let values = radii.iter().map(|&r| f(r)).collect();
        Self::from_samples(radii, values)
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }
    pub fn range(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    fn eval(&self, r: f64, k: usize) -> Result<f64> {
        if k > Self::ORDER {
            return Err(Error::OrderTooHigh { requested: k, available: Self::ORDER });
        }
        if !(r >= self.r_min && r <= self.r_max) {
            return Err(Error::OutOfGrid { r, min: self.r_min, max: self.r_max });
        }
        let [v, dx, dxx] = self.spline.eval(r.ln().clamp(self.spline.lower(), self.spline.upper()))?;
        Ok(match k {
            0 => v,
            1 => dx / r,
            _ => (dxx - dx) / (r * r),
        })
    }
}

/// Which family a radial profile belongs to.
#[derive(Clone)]
pub enum ProfileKind {
    /// `log(2λ / (λ² + r²))`
    Sphere { lambda: f64 },
    /// `-β log(r² + 1) + r²`
    Counterexample { beta: f64 },
    /// Any other closed form (constants, `a r²`, `c log r`, linear combinations).
    Elementary(ClosedForm),
    PotentialGenerated(Arc<PotentialProfile>),
    PicardSolution(Arc<PotentialProfile>),
    Sampled(Arc<SampledProfile>),
}

/// A radial conformal factor on `R^n`.
#[derive(Clone)]
pub struct RadialProfile {
    n: usize,
    kind: ProfileKind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile").field("n", &self.n).field("family", &self.label()).finish()
    }
}

impl RadialProfile {
    pub fn new(n: usize, kind: ProfileKind) -> Result<Self> {
        check_dimension(n)?;
        match &kind {
            ProfileKind::Sphere { lambda } if !(*lambda > 0.0) => {
                return Err(invalid("sphere profile needs λ > 0"));
            }
            ProfileKind::Counterexample { beta } if !beta.is_finite() => {
                return Err(invalid("counterexample needs finite β"));
            }
            ProfileKind::PotentialGenerated(p) | ProfileKind::PicardSolution(p) if p.dimension() != n => {
                return Err(invalid("potential profile dimension mismatch"));
            }
            _ => {}
        }
        Ok(Self { n, kind })
    }

    pub fn sphere(n: usize, lambda: f64) -> Result<Self> {
        Self::new(n, ProfileKind::Sphere { lambda })
    }
    pub fn counterexample(n: usize, beta: f64) -> Result<Self> {
        Self::new(n, ProfileKind::Counterexample { beta })
    }
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, ProfileKind::Elementary(ClosedForm::new(vec![Term::Const(c)])))
    }
    /// `u = a r²`; `a = -1` is the non-normal example `-|x|²`.
    pub fn quadratic(n: usize, a: f64) -> Result<Self> {
        Self::new(n, ProfileKind::Elementary(ClosedForm::new(vec![Term::Quadratic(a)])))
    }
    /// `u = c log r`, singular at the origin.
    pub fn log_radius(n: usize, c: f64) -> Result<Self> {
        Self::new(n, ProfileKind::Elementary(ClosedForm::new(vec![Term::LogShift { coef: 0.5 * c, shift: 0.0 }])))
    }
    pub fn elementary(n: usize, cf: ClosedForm) -> Result<Self> {
        Self::new(n, ProfileKind::Elementary(cf))
    }
    pub fn sampled(n: usize, s: SampledProfile) -> Result<Self> {
        Self::new(n, ProfileKind::Sampled(Arc::new(s)))
    }

    pub fn dimension(&self) -> usize {
        self.n
    }
    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Sphere { lambda } => format!("sphere(lambda={lambda})"),
            ProfileKind::Counterexample { beta } => format!("counterexample(beta={beta})"),
            ProfileKind::Elementary(cf) => format!("closed-form({} terms)", cf.terms.len()),
            ProfileKind::PotentialGenerated(p) => format!("potential({})", p.source().label()),
            ProfileKind::PicardSolution(p) => format!("picard({})", p.source().label()),
            ProfileKind::Sampled(s) => format!("sampled[{:e}, {:e}]", s.r_min, s.r_max),
        }
    }

    /// The closed form backing this profile, if it has one.
    pub fn closed_form(&self) -> Option<ClosedForm> {
        match &self.kind {
            ProfileKind::Sphere { lambda } => Some(ClosedForm::new(vec![
                Term::Const((2.0 * lambda).ln()),
                Term::LogShift { coef: -1.0, shift: lambda * lambda },
            ])),
            ProfileKind::Counterexample { beta } => Some(ClosedForm::new(vec![
                Term::LogShift { coef: -beta, shift: 1.0 },
                Term::Quadratic(1.0),
            ])),
            ProfileKind::Elementary(cf) => Some(cf.clone()),
            _ => None,
        }
    }

    pub fn potential(&self) -> Option<&Arc<PotentialProfile>> {
        match &self.kind {
            ProfileKind::PotentialGenerated(p) | ProfileKind::PicardSolution(p) => Some(p),
            _ => None,
        }
    }

    /// Highest derivative order `eval` accepts.
    pub fn derivative_order(&self) -> usize {
        match &self.kind {
            ProfileKind::Sampled(_) => SampledProfile::ORDER,
            ProfileKind::PotentialGenerated(_) | ProfileKind::PicardSolution(_) => self.n,
            _ => CLOSED_FORM_ORDER,
        }
    }

    /// Radii on which the profile can be evaluated.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            ProfileKind::Sampled(s) => s.range(),
            ProfileKind::PotentialGenerated(p) | ProfileKind::PicardSolution(p) => p.range(),
            _ => {
                let singular = self.closed_form().is_some_and(|cf| cf.singular_at_origin());
                (if singular { f64::MIN_POSITIVE } else { 0.0 }, f64::INFINITY)
            }
        }
    }

    /// `d^k u / dr^k` at `r`.
    pub fn eval(&self, r: f64, k: usize) -> Result<f64> {
        if k <= 2 {
            if let ProfileKind::Sampled(s) = &self.kind {
                return s.eval(r, k);
            }
        }
        Ok(self.jet(r, k)?[k])
    }

    /// `[u, u', …, u^{(order)}]` at `r`.
    pub fn jet(&self, r: f64, order: usize) -> Result<Vec<f64>> {
        if !(r >= 0.0) {
            return Err(invalid(format!("radius must be non-negative, got {r}")));
        }
        let available = self.derivative_order();
        if order > available {
            return Err(Error::OrderTooHigh { requested: order, available });
        }
        match &self.kind {
            ProfileKind::Sampled(s) => (0..=order).map(|k| s.eval(r, k)).collect(),
            ProfileKind::PotentialGenerated(p) | ProfileKind::PicardSolution(p) => {
                if order <= 2 {
                    Ok(p.table_eval(r)?[..=order].to_vec())
                } else {
                    p.jet_direct(r, order)
                }
            }
            _ => self.closed_form().expect("closed-form family").r_jet(r, order),
        }
    }

    /// Linear combination `Σ a_i u_i` of closed-form profiles.
    pub fn linear_combination(parts: &[(f64, &RadialProfile)]) -> Result<Self> {
        let n = parts.first().map(|p| p.1.n).ok_or_else(|| invalid("empty combination"))?;
        let mut forms = Vec::with_capacity(parts.len());
        for (a, p) in parts {
            if p.n != n {
                return Err(invalid("dimension mismatch in linear combination"));
            }
            forms.push((*a, p.closed_form().ok_or_else(|| invalid("linear combinations need closed forms"))?));
        }
        let refs: Vec<(f64, &ClosedForm)> = forms.iter().map(|(a, c)| (*a, c)).collect();
        Self::elementary(n, ClosedForm::linear_combination(&refs))
    }
}

/// `d^k u / dr^k (r)` for profile `p`.
pub fn eval_profile(p: &RadialProfile, r: f64, k: usize) -> Result<f64> {
    p.eval(r, k)
}

/// Where a curvature density lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Support {
    /// `f = 0` outside `[start, radius]`.
    Compact { start: f64, radius: f64 },
    /// `f` decays like `r^{-exponent}`; `cutoff` is where the quadrature stopped.
    Decay { start: f64, exponent: f64, cutoff: f64 },
}

impl Support {
    pub fn start(&self) -> f64 {
        match *self {
            Support::Compact { start, .. } | Support::Decay { start, .. } => start,
        }
    }
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial density standing for `Q e^{nu}`.
#[derive(Clone)]
pub struct CurvatureDensity {
    n: usize,
    f: RadialFn,
    support: Support,
    total: f64,
    tail_estimate: f64,
    label: String,
    /// Radii where `f` may fail to be smooth; quadrature panels break there.
    kinks: Vec<f64>,
}

impl fmt::Debug for CurvatureDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureDensity")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("support", &self.support)
            .field("total", &self.total)
            .finish()
    }
}

const TOTAL_REL_TOL: f64 = 1e-15;

impl CurvatureDensity {
    /// Density supported in `[start, radius]`; the total is integrated piecewise.
    pub fn compact(n: usize, label: impl Into<String>, start: f64, radius: f64, f: RadialFn) -> Result<Self> {
        Self::compact_with_kinks(n, label.into(), start, radius, f, Vec::new())
    }

    fn compact_with_kinks(
        n: usize,
        label: String,
        start: f64,
        radius: f64,
        f: RadialFn,
        extra_kinks: Vec<f64>,
    ) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > start && start >= 0.0) {
            return Err(invalid("compact support needs 0 <= start < radius"));
        }
        let area = sphere_area(n - 1);
        let mut breaks: Vec<f64> = (0..=32).map(|i| start + (radius - start) * i as f64 / 32.0).collect();
        let inner = start.max(radius * 1e-6);
        if inner < radius {
            breaks.extend(crate::quadrature::log_points(inner, radius, 8));
        }
        let mut kinks = vec![start, radius];
        kinks.extend(extra_kinks.into_iter().filter(|&k| k > start && k < radius));
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        breaks.extend(&kinks);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * radius);
        let total = breaks
            .windows(2)
            .map(|w| gl_integrate(w[0], w[1], 24, |s| f(s) * area * s.powi(n as i32 - 1)))
            .sum();
        Ok(Self {
            n,
            f,
            support: Support::Compact { start, radius },
            total,
            tail_estimate: 0.0,
            label,
            kinks,
        })
    }

    /// Density on `[start, ∞)` whose total is integrated with a tail estimate.
    pub fn decaying(n: usize, label: impl Into<String>, start: f64, scale: f64, f: RadialFn) -> Result<Self> {
        check_dimension(n)?;
        let area = sphere_area(n - 1);
        let g = |s: f64| if s < start { 0.0 } else { f(s) * area * s.powi(n as i32 - 1) };
        let mut tail = integrate_to_infinity(g, scale.max(start), TOTAL_REL_TOL, 1e12)?;
        if start > 0.0 {
            // The integrator's first panels straddle `start`; redo the inner part exactly.
            let inner = scale.max(start);
            let wrong: f64 = [0.0, 1e-3, 1e-2, 1e-1, 1.0]
                .windows(2)
                .map(|w| gl_integrate(w[0] * inner, w[1] * inner, 24, g))
                .sum();
            let right: f64 = crate::quadrature::log_points(start, inner.max(start * 1.0001), 16)
                .windows(2)
                .map(|w| gl_integrate(w[0], w[1], 24, g))
                .sum();
            tail.value += right - wrong;
        }
        let cutoff = tail.cutoff;
        let (f1, f2) = (f(cutoff), f(2.0 * cutoff));
        let exponent = if f1 != 0.0 && f2 != 0.0 && f1.signum() == f2.signum() {
            -(f2 / f1).ln() / 2f64.ln()
        } else {
            f64::INFINITY
        };
        Ok(Self {
            n,
            f,
            support: Support::Decay { start, exponent, cutoff },
            total: tail.value,
            tail_estimate: tail.tail_estimate,
            label: label.into(),
            kinks: vec![start],
        })
    }

    /// `A (1 - (s/R)²)^p` on `[0, R]`, with `A` chosen so the density has the given `α₀`.
    pub fn bump(n: usize, alpha0: f64, radius: f64, power: u32) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) || power < 2 {
            return Err(invalid("bump needs radius > 0 and power >= 2"));
        }
        let unit: RadialFn = Arc::new(move |s: f64| {
            let x = s / radius;
            if x >= 1.0 {
                0.0
            } else {
                (1.0 - x * x).powi(power as i32)
            }
        });
        let probe = Self::compact(n, "bump", 0.0, radius, unit.clone())?;
        let amplitude = alpha0 / probe.alpha0();
        let f: RadialFn = Arc::new(move |s| amplitude * unit(s));
        Self::compact(n, format!("bump(alpha0={alpha0},R={radius},p={power})"), 0.0, radius, f)
    }

    /// `A ((s-a)(b-s))^p` on the shell `[a, b]`, scaled to the given `α₀`.
    pub fn shell(n: usize, alpha0: f64, inner: f64, outer: f64, power: u32) -> Result<Self> {
        check_dimension(n)?;
        if !(outer > inner && inner >= 0.0) || power < 2 {
            return Err(invalid("shell needs 0 <= inner < outer and power >= 2"));
        }
        let unit: RadialFn = Arc::new(move |s: f64| {
            if s <= inner || s >= outer {
                0.0
            } else {
                ((s - inner) * (outer - s)).powi(power as i32)
            }
        });
        let probe = Self::compact(n, "shell", inner, outer, unit.clone())?;
        let amplitude = alpha0 / probe.alpha0();
        let f: RadialFn = Arc::new(move |s| amplitude * unit(s));
        Self::compact(n, format!("shell(alpha0={alpha0},[{inner},{outer}],p={power})"), inner, outer, f)
    }

    /// `A e^{-(s/w)²}`.
    pub fn gaussian(n: usize, amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("gaussian needs width > 0"));
        }
        let f: RadialFn = Arc::new(move |s: f64| amplitude * (-(s / width) * (s / width)).exp());
        let cutoff = width * 7.0;
        Self::compact(n, format!("gaussian(A={amplitude},w={width})"), 0.0, cutoff, f)
    }

    /// Piecewise-cubic interpolation of tabulated `(r, value)` pairs, zero beyond the table.
    pub fn tabulated(n: usize, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let lo = *radii.first().ok_or_else(|| invalid("empty density table"))?;
        let hi = *radii.last().unwrap();
        let spline = CubicSpline::new(radii, values)?;
        let f: RadialFn = Arc::new(move |s: f64| {
            if s < lo || s > hi {
                0.0
            } else {
                spline.eval(s).map(|v| v[0]).unwrap_or(0.0)
            }
        });
        Self::compact(n, "tabulated", lo.max(0.0), hi, f)
    }

    /// The zero density.
    pub fn zero(n: usize) -> Result<Self> {
        Self::compact(n, "zero", 0.0, 1.0, Arc::new(|_| 0.0))
    }

    /// Restriction to `|y| >= inner`, as used for exterior (end) densities.
    pub fn restricted_to_exterior(&self, inner: f64) -> Result<Self> {
        let f = self.f.clone();
        let g: RadialFn = Arc::new(move |s| if s >= inner { f(s) } else { 0.0 });
        let label = format!("{}|r>={inner}", self.label);
        match self.support {
            Support::Compact { radius, .. } => Self::compact(self.n, label, inner, radius.max(inner * (1.0 + 1e-12)), g),
            Support::Decay { .. } => Self::decaying(self.n, label, inner, inner.max(1.0), g),
        }
    }

    /// Sum of two densities on the same dimension.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(invalid("dimension mismatch"));
        }
        let (f1, f2) = (self.f.clone(), other.f.clone());
        let g: RadialFn = Arc::new(move |s| f1(s) + f2(s));
        let label = format!("{}+{}", self.label, other.label);
        let kinks: Vec<f64> = self.kinks.iter().chain(&other.kinks).copied().collect();
        match (self.support, other.support) {
            (Support::Compact { start: a, radius: r1 }, Support::Compact { start: b, radius: r2 }) => {
                Self::compact_with_kinks(self.n, label, a.min(b), r1.max(r2), g, kinks)
            }
            _ => {
                let mut d = Self::decaying(self.n, label, self.support.start().min(other.support.start()), 1.0, g)?;
                d.kinks = kinks;
                d.kinks.sort_by(f64::total_cmp);
                d.kinks.dedup();
                Ok(d)
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }
    pub fn value(&self, s: f64) -> f64 {
        (self.f)(s)
    }
    pub fn function(&self) -> RadialFn {
        self.f.clone()
    }
    pub fn support(&self) -> Support {
        self.support
    }
    /// `∫_{R^n} f dx`.
    pub fn total(&self) -> f64 {
        self.total
    }
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// Radii where the density may be non-smooth, including the support edges.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }
    /// `α₀ = 2 ∫ f / ((n-1)! |S^n|)`.
    pub fn alpha0(&self) -> f64 {
        alpha_normalization(self.n) * self.total
    }

    /// Radius beyond which the density is treated as zero by the potential operator.
    pub fn effective_radius(&self) -> f64 {
        match self.support {
            Support::Compact { radius, .. } => radius,
            Support::Decay { cutoff, .. } => cutoff,
        }
    }
}

/// `f = (-Δ)^{n/2} u`, together with its total over `R^n`.
pub fn density_from_profile(p: &RadialProfile) -> Result<CurvatureDensity> {
    let n = p.dimension();
    if p.derivative_order() < n {
        return Err(Error::OrderTooHigh { requested: n, available: p.derivative_order() });
    }
    let m = n / 2;
    if let Some(pot) = p.potential() {
        let src = pot.source().support();
        let (start, end) = (src.start(), pot.source().effective_radius());
        let prof = p.clone();
        let f: RadialFn = Arc::new(move |s| calculus::polyharmonic(&prof, s, m).unwrap_or(f64::NAN));
        return CurvatureDensity::compact(n, format!("density[{}]", p.label()), start, end, f);
    }
    if p.closed_form().is_none() {
        return Err(Error::OrderTooHigh { requested: n, available: p.derivative_order() });
    }
    let (lo, _) = p.domain();
    if lo > 0.0 {
        return Err(invalid("density_from_profile needs a profile regular at the origin"));
    }
    let prof = p.clone();
    let f: RadialFn = Arc::new(move |s| calculus::polyharmonic(&prof, s, m).unwrap_or(f64::NAN));
    let scale = match p.kind() {
        ProfileKind::Sphere { lambda } => lambda.max(1.0),
        _ => 1.0,
    };
    CurvatureDensity::decaying(n, format!("density[{}]", p.label()), 0.0, scale, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_examples() {
        let p = RadialProfile::sphere(4, 1.0).unwrap();
        assert!((eval_profile(&p, 0.0, 0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((eval_profile(&p, 1.0, 1).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(eval_profile(&RadialProfile::counterexample(4, 1.0).unwrap(), 0.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_derivatives_match_hand_formulas() {
        let p = RadialProfile::sphere(4, 2.0).unwrap();
        let r = 0.8;
        let d = 4.0 + r * r;
        let j = p.jet(r, 3).unwrap();
        assert!((j[0] - (4.0 / d).ln()).abs() < 1e-15);
        assert!((j[1] + 2.0 * r / d).abs() < 1e-15);
        assert!((j[2] - (2.0 * r * r - 8.0) / (d * d)).abs() < 1e-15);
        let third = 4.0 * r * (12.0 - r * r) / (d * d * d);
        assert!((j[3] - third).abs() < 1e-14);
    }

    #[test]
    fn odd_derivatives_vanish_at_origin() {
        for p in [
            RadialProfile::sphere(6, 0.5).unwrap(),
            RadialProfile::counterexample(4, -1.0).unwrap(),
            RadialProfile::quadratic(4, 3.0).unwrap(),
        ] {
            let j = p.jet(0.0, 7).unwrap();
            for k in [1, 3, 5, 7] {
                assert_eq!(j[k], 0.0, "{} k={k}", p.label());
            }
        }
    }

    #[test]
    fn order_and_domain_errors() {
        let s = SampledProfile::from_fn(0.1, 10.0, 50, |r| r.ln()).unwrap();
        let p = RadialProfile::sampled(4, s).unwrap();
        assert!(matches!(p.eval(1.0, 3), Err(Error::OrderTooHigh { .. })));
        assert!(matches!(p.eval(20.0, 0), Err(Error::OutOfGrid { .. })));
        assert!((p.eval(2.0, 1).unwrap() - 0.5).abs() < 1e-6);
        let lr = RadialProfile::log_radius(4, 1.0).unwrap();
        assert!(lr.eval(0.0, 0).is_err());
        assert!((lr.eval(3.0, 0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(RadialProfile::sphere(5, 1.0).is_err());
        assert!(RadialProfile::sphere(4, -1.0).is_err());
    }

    #[test]
    fn sampled_profile_reports_interpolation_error() {
        let s = SampledProfile::from_fn(0.01, 100.0, 200, |r| (1.0 + r * r).ln()).unwrap();
        assert!(s.error_bound() > 0.0 && s.error_bound() < 1e-4);
    }

    #[test]
    fn sphere_density_total() {
        let f = density_from_profile(&RadialProfile::sphere(4, 1.0).unwrap()).unwrap();
        assert!((f.total() / (16.0 * PI * PI) - 1.0).abs() < 1e-10, "{}", f.total());
        assert!((f.alpha0() - 2.0).abs() < 1e-10);
        match f.support() {
            Support::Decay { exponent, .. } => assert!((exponent - 8.0).abs() < 0.01),
            _ => panic!("expected decay metadata"),
        }
    }

    #[test]
    fn constant_profile_has_zero_density() {
        let f = density_from_profile(&RadialProfile::constant(4, 3.0).unwrap()).unwrap();
        assert_eq!(f.total(), 0.0);
        assert_eq!(f.value(1.3), 0.0);
    }

    #[test]
    fn counterexample_total() {
        let f = density_from_profile(&RadialProfile::counterexample(4, 1.0).unwrap()).unwrap();
        assert!((f.total() / (16.0 * PI * PI) - 1.0).abs() < 1e-9, "{}", f.total());
    }

    #[test]
    fn sums_keep_both_kink_sets() {
        let a = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
        let b = CurvatureDensity::shell(4, 0.3, 1.0, 3.0, 4).unwrap();
        let s = a.sum(&b).unwrap();
        assert_eq!(s.kinks(), &[0.0, 1.0, 2.0, 3.0]);
        assert!((s.alpha0() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn bump_density_hits_requested_alpha() {
        let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
        assert!((f.alpha0() - 0.5).abs() < 1e-14);
        assert_eq!(f.value(2.5), 0.0);
        let ext = f.restricted_to_exterior(1.0).unwrap();
        assert!(ext.alpha0() < 0.5 && ext.alpha0() > 0.0);
        assert_eq!(ext.value(0.5), 0.0);
    }
}
