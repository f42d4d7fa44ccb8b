//! Gauss–Legendre rules, composite radial grids and graded angular rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::constants::MAX_DIM;
use crate::error::{Error, Result};

/// Nodes and weights of the `q`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_q.
        let mut z = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[q - 1 - i] = z;
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(q: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached reference rule of the orders used throughout the crate.
pub fn reference_rule(q: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R12: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R20: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R24: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match q {
        8 => R8.get_or_init(|| gauss_legendre(8)),
        12 => R12.get_or_init(|| gauss_legendre(12)),
        16 => R16.get_or_init(|| gauss_legendre(16)),
        20 => R20.get_or_init(|| gauss_legendre(20)),
        24 => R24.get_or_init(|| gauss_legendre(24)),
        _ => panic!("no cached Gauss-Legendre rule of order {q}"),
    }
}

/// Integrates `f` over `[a, b]` with a `q`-point rule (`q` one of the cached orders).
pub fn gl_integrate(a: f64, b: f64, q: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = reference_rule(q);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// A composite Gauss–Legendre rule on `[b_0, b_M]` with panel breakpoints `b_i`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    breakpoints: Vec<f64>,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(mut breakpoints: Vec<f64>, order: usize) -> Result<Self> {
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument("radial grid needs two breakpoints".into()));
        }
        if breakpoints[0] < 0.0 || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("radial grid breakpoints must be finite and >= 0".into()));
        }
        let (x, w) = reference_rule(order);
        let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breakpoints.windows(2) {
            let half = 0.5 * (p[1] - p[0]);
            let mid = 0.5 * (p[1] + p[0]);
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + half * xi);
                weights.push(wi * half);
            }
        }
        Ok(Self { breakpoints, order, nodes, weights })
    }

    /// `0`, then `per_decade` log-spaced panels per decade from `r_min` to `r_max`,
    /// with any `extra` breakpoints merged in.
    pub fn log_spaced(r_min: f64, r_max: f64, per_decade: usize, order: usize, extra: &[f64]) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidArgument(format!("bad log grid range [{r_min}, {r_max}]")));
        }
        let mut b = vec![0.0];
        b.extend(log_points(r_min, r_max, per_decade));
        b.extend(extra.iter().copied().filter(|&e| e > 0.0 && e < r_max));
        Self::new(b, order)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }
    pub fn upper(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }
    pub fn panel_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Index of the panel containing `r` (the last panel for `r == upper`).
    pub fn panel_of(&self, r: f64) -> Option<usize> {
        if r < self.lower() || r > self.upper() {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= r);
        Some(idx.saturating_sub(1).min(self.panel_count() - 1))
    }

    /// Stable content hash of the grid, used as a cache key.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.order.hash(&mut h);
        for b in &self.breakpoints {
            b.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Geometric sequence from `a` to `b` (inclusive) with `per_decade` points per decade.
pub fn log_points(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let decades = (b / a).log10();
    let count = (decades * per_decade as f64).ceil().max(1.0) as usize;
    (0..=count)
        .map(|i| a * (b / a).powf(i as f64 / count as f64))
        .collect()
}

/// Result of integrating a radial integrand out to infinity.
#[derive(Debug, Clone, Copy)]
pub struct TailIntegral {
    pub value: f64,
    pub tail_estimate: f64,
    /// Radius at which the explicit quadrature stopped.
    pub cutoff: f64,
}

/// Integrates `g` over `[0, ∞)` decade by decade; the remainder beyond the last decade
/// is estimated from the geometric decay of successive decade contributions.
///
/// `scale` sets the radius of the first decade `[0, scale]`.
pub fn integrate_to_infinity(
    mut g: impl FnMut(f64) -> f64,
    scale: f64,
    rel_tol: f64,
    max_radius: f64,
) -> Result<TailIntegral> {
    let per_decade = 8;
    let mut total = 0.0;
    // [0, scale] with a fine inner split to resolve structure near the origin.
    for w in [0.0, 1e-3, 1e-2, 1e-1, 1.0].windows(2) {
        total += gl_integrate(w[0] * scale, w[1] * scale, 24, &mut g);
    }
    let mut lo = scale;
    let mut prev: Option<f64> = None;
    let mut small_streak = 0;
    let factor = 10f64.powf(1.0 / per_decade as f64);
    while lo < max_radius {
        let mut decade = 0.0;
        let mut a = lo;
        for _ in 0..per_decade {
            let b = a * factor;
            decade += gl_integrate(a, b, 24, &mut g);
            a = b;
        }
        lo = a;
        total += decade;
        if !decade.is_finite() {
            return Err(Error::TailNotConvergent { radius: lo, detail: "non-finite integrand".into() });
        }
        let tiny = decade.abs() <= rel_tol * total.abs().max(f64::MIN_POSITIVE);
        let decaying = prev.is_none_or(|p| decade.abs() <= p.abs() || decade == 0.0);
        if tiny && decaying {
            small_streak += 1;
            if small_streak >= 2 {
                let tail = match prev {
                    Some(p) if p != 0.0 && decade.abs() < p.abs() => {
                        let ratio = decade.abs() / p.abs();
                        decade * ratio / (1.0 - ratio)
                    }
                    _ => 0.0,
                };
                return Ok(TailIntegral { value: total + tail, tail_estimate: tail.abs(), cutoff: lo });
            }
        } else {
            small_streak = 0;
        }
        prev = Some(decade);
    }
    Err(Error::TailNotConvergent {
        radius: lo,
        detail: format!("decade contributions still above relative tolerance {rel_tol:e}"),
    })
}

/// One node of a normalized angular rule on `θ ∈ [0, π]` with weight `sin^{n-2} θ`.
#[derive(Debug, Clone, Copy)]
pub struct AngularNode {
    pub theta: f64,
    /// `sin²(θ/2)`, evaluated without cancellation near `θ = 0`.
    pub half_sin_sq: f64,
    pub sin: f64,
    pub cos: f64,
    pub weight: f64,
}

/// Angular quadrature graded dyadically toward `θ = 0`; weights sum to one.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub levels: usize,
    pub nodes: Vec<AngularNode>,
}

pub const ANGULAR_ORDER: usize = 16;
pub const MAX_LEVELS: usize = 56;
const MIN_LEVELS: usize = 3;

fn build_angular_rule(n: usize, levels: usize) -> AngularRule {
    let (x, w) = reference_rule(ANGULAR_ORDER);
    let mut panels = Vec::with_capacity(levels + 1);
    let mut hi = PI;
    for _ in 0..levels {
        let lo = hi * 0.5;
        panels.push((lo, hi));
        hi = lo;
    }
    panels.push((0.0, hi));
    let mut nodes = Vec::with_capacity(panels.len() * ANGULAR_ORDER);
    for (a, b) in panels {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for (xi, wi) in x.iter().zip(w) {
            let theta = mid + half * xi;
            let s_half = (0.5 * theta).sin();
            let sin = theta.sin();
            nodes.push(AngularNode {
                theta,
                half_sin_sq: s_half * s_half,
                sin,
                cos: theta.cos(),
                weight: wi * half * sin.powi(n as i32 - 2),
            });
        }
    }
    let norm: f64 = nodes.iter().map(|nd| nd.weight).sum();
    for nd in &mut nodes {
        nd.weight /= norm;
    }
    AngularRule { levels, nodes }
}

/// Cached angular rule for dimension `n` with the given number of dyadic levels.
pub fn angular_rule(n: usize, levels: usize) -> &'static AngularRule {
    const SLOTS: usize = MAX_DIM / 2 + 1;
    static RULES: [OnceLock<Vec<AngularRule>>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    assert!(n >= 2 && n.is_multiple_of(2) && n <= MAX_DIM, "angular rules exist for even n <= {MAX_DIM}");
    let table = RULES[n / 2].get_or_init(|| (0..=MAX_LEVELS).map(|k| build_angular_rule(n, k)).collect());
    &table[levels.clamp(MIN_LEVELS, MAX_LEVELS)]
}

/// Number of dyadic levels needed so that the innermost panel is well inside the
/// angular scale `theta0` at which the integrand varies.
pub fn levels_for_scale(theta0: f64) -> usize {
    if !(theta0 > 0.0) {
        return MAX_LEVELS;
    }
    let k = (4.0 * PI / theta0).log2().ceil();
    if k.is_nan() || k < MIN_LEVELS as f64 {
        MIN_LEVELS
    } else {
        (k as usize).min(MAX_LEVELS)
    }
}
