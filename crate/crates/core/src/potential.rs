//! The log-potential of a radial curvature density and the damped Picard solver for
//! prescribed Q.
//!
//! For a radial density `f`,
//! `u(r) = c ∫₀^∞ (log s - F_n(r,s)) f(s) s^{n-1} ds + C` with
//! `c = 2|S^{n-1}|/((n-1)!|S^n|)`. The `s`-integral runs over a composite
//! Gauss–Legendre grid whose breakpoints include every tabulated output radius, so the
//! kernel's diagonal kink always falls on a panel edge. Derivatives of `u` come from
//! differentiating `F_n` under the integral.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{check_dimension, radial_potential_prefactor};
use crate::error::{invalid, Error, Result};
use crate::interp::{CubicSpline, HermiteTable};
use crate::kernels::log_kernel_jet;
use crate::profiles::{CurvatureDensity, ProfileKind, RadialProfile, Support};
use crate::quadrature::{log_points, reference_rule, RadialGrid};

/// Discretization and normalization of the potential operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialConfig {
    /// Truncation radius of the density; defaults to the density's effective radius.
    pub r_max: Option<f64>,
    /// Smallest positive breakpoint of the radial grid.
    pub r_min: f64,
    pub panels_per_decade: usize,
    /// Gauss–Legendre nodes per panel (8, 12, 16, 20 or 24).
    pub order: usize,
    /// Outer radius of the tabulated profile.
    pub far_radius: f64,
    pub far_per_decade: usize,
    /// Additive normalization `C`.
    pub constant: f64,
    /// Largest acceptable relative mass beyond the truncation radius.
    pub tail_tol: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            r_min: 1e-3,
            panels_per_decade: 48,
            order: 12,
            far_radius: 1e5,
            far_per_decade: 16,
            constant: 0.0,
            tail_tol: 1e-10,
        }
    }
}

/// Kernel matrices `K_k[i][j]` between output radii and quadrature nodes:
/// `K_0 = log s - F_n`, `K_1 = -∂_r F_n`, `K_2 = -∂_r² F_n`.
#[derive(Debug)]
pub struct KernelMatrices {
    rows: usize,
    cols: usize,
    k: [Vec<f64>; 3],
}

impl KernelMatrices {
    fn build(n: usize, outputs: &[f64], nodes: &[f64]) -> Self {
        let rows = outputs.len();
        let cols = nodes.len();
        let per_row: Vec<[Vec<f64>; 3]> = outputs
            .par_iter()
            .map(|&r| {
                let mut k0 = Vec::with_capacity(cols);
                let mut k1 = Vec::with_capacity(cols);
                let mut k2 = Vec::with_capacity(cols);
                for &s in nodes {
                    let jet = log_kernel_jet(n, r, s, 2);
                    k0.push(s.ln() - jet[0]);
                    k1.push(if r == 0.0 { 0.0 } else { -jet[1] });
                    k2.push(-jet[2]);
                }
                [k0, k1, k2]
            })
            .collect();
        let mut k = [
            Vec::with_capacity(rows * cols),
            Vec::with_capacity(rows * cols),
            Vec::with_capacity(rows * cols),
        ];
        for row in per_row {
            for (dst, src) in k.iter_mut().zip(row) {
                dst.extend(src);
            }
        }
        Self { rows, cols, k }
    }

    /// `[Σ_j K_0 g_j, Σ_j K_1 g_j, Σ_j K_2 g_j]` for each output radius.
    fn apply(&self, g: &[f64]) -> Vec<[f64; 3]> {
        assert_eq!(g.len(), self.cols);
        (0..self.rows)
            .into_par_iter()
            .map(|i| {
                let mut out = [0.0; 3];
                for (slot, mat) in out.iter_mut().zip(&self.k) {
                    let row = &mat[i * self.cols..(i + 1) * self.cols];
                    *slot = row.iter().zip(g).map(|(a, b)| a * b).sum();
                }
                out
            })
            .collect()
    }
}

type MatrixKey = (usize, u64, u64);

fn cached_matrices(n: usize, grid: &RadialGrid, outputs: &[f64]) -> Arc<KernelMatrices> {
    static CACHE: OnceLock<Mutex<HashMap<MatrixKey, Arc<KernelMatrices>>>> = OnceLock::new();
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for r in outputs {
        r.to_bits().hash(&mut h);
    }
    let key = (n, grid.fingerprint(), h.finish());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&key) {
        return m.clone();
    }
    let built = Arc::new(KernelMatrices::build(n, outputs, grid.nodes()));
    let mut guard = cache.lock().unwrap();
    // Bound memory: tables are cheap to rebuild compared with their footprint.
    if guard.len() >= 32 {
        guard.clear();
    }
    guard.insert(key, built.clone());
    built
}

/// Discretization shared by the potential operator and the Picard solver.
#[derive(Debug, Clone)]
struct Discretization {
    n: usize,
    grid: RadialGrid,
    outputs: Vec<f64>,
    prefactor: f64,
}

impl Discretization {
    fn new(n: usize, start: f64, end: f64, cfg: &PotentialConfig, extra: &[f64]) -> Result<Self> {
        check_dimension(n)?;
        if !(end > start) {
            return Err(invalid("potential grid needs end > start"));
        }
        let grid = if start > 0.0 {
            let mut b = log_points(start, end, cfg.panels_per_decade);
            b.extend(extra.iter().copied().filter(|&e| e > start && e < end));
            RadialGrid::new(b, cfg.order)?
        } else {
            let r_min = cfg.r_min.min(end * 0.5);
            RadialGrid::log_spaced(r_min, end, cfg.panels_per_decade, cfg.order, extra)?
        };
        let mut outputs = Vec::new();
        if start > 0.0 {
            outputs.push(0.0);
            let r_min = cfg.r_min.min(start * 0.5);
            let inner = log_points(r_min, start, cfg.panels_per_decade);
            outputs.extend(&inner[..inner.len() - 1]);
        }
        outputs.extend(grid.breakpoints());
        if cfg.far_radius > end {
            // The first decade past the support keeps the grid resolution.
            let near = (10.0 * end).min(cfg.far_radius);
            outputs.extend(log_points(end, near, cfg.panels_per_decade).into_iter().skip(1));
            if cfg.far_radius > near {
                outputs.extend(log_points(near, cfg.far_radius, cfg.far_per_decade).into_iter().skip(1));
            }
        }
        Ok(Self { n, grid, outputs, prefactor: radial_potential_prefactor(n) })
    }

    fn matrices(&self) -> Arc<KernelMatrices> {
        cached_matrices(self.n, &self.grid, &self.outputs)
    }

    /// Quadrature-weighted density samples `w_j f(s_j) s_j^{n-1}`.
    fn weighted(&self, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
        let p = self.n as i32 - 1;
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .map(|(&s, &w)| w * f(s) * s.powi(p))
            .collect()
    }

    fn jets(&self, g: &[f64], constant: f64) -> Vec<[f64; 3]> {
        self.matrices()
            .apply(g)
            .into_iter()
            .map(|[a, b, c]| [self.prefactor * a + constant, self.prefactor * b, self.prefactor * c])
            .collect()
    }
}

/// A profile generated by the log-potential, tabulated as `(u, u', u'')` with
/// quintic Hermite interpolation and evaluated directly for higher derivatives.
pub struct PotentialProfile {
    n: usize,
    source: CurvatureDensity,
    constant: f64,
    disc: Discretization,
    table: HermiteTable,
}

impl fmt::Debug for PotentialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialProfile")
            .field("n", &self.n)
            .field("source", &self.source.label())
            .field("constant", &self.constant)
            .field("outputs", &self.disc.outputs.len())
            .field("nodes", &self.disc.grid.nodes().len())
            .finish()
    }
}

impl PotentialProfile {
    pub fn dimension(&self) -> usize {
        self.n
    }
    pub fn source(&self) -> &CurvatureDensity {
        &self.source
    }
    pub fn constant(&self) -> f64 {
        self.constant
    }
    pub fn range(&self) -> (f64, f64) {
        (self.table.lower(), self.table.upper())
    }
    /// Output radii and tabulated `(u, u', u'')`.
    pub fn table(&self) -> (&[f64], &[[f64; 3]]) {
        (self.table.radii(), self.table.jets())
    }
    pub fn grid(&self) -> &RadialGrid {
        &self.disc.grid
    }

    /// `(u, u', u'')` at `r` from the table.
    pub fn table_eval(&self, r: f64) -> Result<[f64; 3]> {
        self.table.eval(r)
    }

    /// `[u, …, u^{(order)}]` at `r` by direct quadrature, `order <= n`.
    ///
    /// The grid panel containing `r` is split at `r`. For `k = n` the jump of
    /// `∂_r^{n-1} F_n` across `s = r` contributes `(-1)^{n/2} f(r)`, the
    /// fundamental-solution normalization of `(-Δ)^{n/2}`.
    pub fn jet_direct(&self, r: f64, order: usize) -> Result<Vec<f64>> {
        let n = self.n;
        if order > n {
            return Err(Error::OrderTooHigh { requested: order, available: n });
        }
        let (lo, hi) = self.range();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfGrid { r, min: lo, max: hi });
        }
        if r == 0.0 {
            return self.jet_at_origin(order);
        }
        let grid = &self.disc.grid;
        let f = self.source.function();
        let mut acc = vec![0.0; order + 1];
        let mut add = |s: f64, w: f64| {
            let g = w * f(s) * s.powi(n as i32 - 1);
            if g == 0.0 {
                return;
            }
            let jet = log_kernel_jet(n, r, s, order);
            acc[0] += (s.ln() - jet[0]) * g;
            for k in 1..=order {
                acc[k] -= jet[k] * g;
            }
        };
        let split = grid.panel_of(r).filter(|_| r > grid.lower() && r < grid.upper());
        let q = grid.order();
        for (p, chunk) in grid.nodes().chunks(q).zip(grid.weights().chunks(q)).enumerate() {
            if Some(p) == split {
                continue;
            }
            for (&s, &w) in chunk.0.iter().zip(chunk.1) {
                add(s, w);
            }
        }
        if let Some(p) = split {
            let (a, b) = (grid.breakpoints()[p], grid.breakpoints()[p + 1]);
            let (x, w) = reference_rule(24);
            for (lo_p, hi_p) in [(a, r), (r, b)] {
                let half = 0.5 * (hi_p - lo_p);
                let mid = 0.5 * (hi_p + lo_p);
                for (xi, wi) in x.iter().zip(w) {
                    add(mid + half * xi, wi * half);
                }
            }
        }
        let c = self.disc.prefactor;
        let mut out: Vec<f64> = acc.iter().map(|v| c * v).collect();
        out[0] += self.constant;
        if order == n {
            let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            out[n] += sign * f(r);
        }
        Ok(out)
    }

    /// Jet at the origin: odd orders vanish; order `n` follows from the Taylor
    /// relation `(Δ^{n/2}u)(0) = u^{(n)}(0)/n! · Π 2i(2i+n-2)` with `(-Δ)^{n/2}u = f`.
    fn jet_at_origin(&self, order: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let low = order.min(n - 2);
        let mut out = vec![0.0; order + 1];
        let [u, _, d2] = self.table_eval(0.0)?;
        out[0] = u;
        if low >= 2 {
            out[2] = d2;
        }
        if low >= 3 {
            // Orders 3..=n-2 from the kernel at r = 0, where F_n(0, s) = log s.
            let f = self.source.function();
            let grid = &self.disc.grid;
            let mut acc = vec![0.0; low + 1];
            for (&s, &w) in grid.nodes().iter().zip(grid.weights()) {
                let g = w * f(s) * s.powi(n as i32 - 1);
                let jet = log_kernel_jet(n, 0.0, s, low);
                for k in 3..=low {
                    acc[k] -= jet[k] * g;
                }
            }
            for k in (4..=low).step_by(2) {
                out[k] = self.disc.prefactor * acc[k];
            }
        }
        if order >= n {
            let m = n / 2;
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut scale = 1.0;
            for i in 1..=n {
                scale *= i as f64;
            }
            for i in 1..=m {
                scale /= (2 * i) as f64 * (2 * i + n - 2) as f64;
            }
            out[n] = sign * self.source.value(0.0) * scale;
        }
        Ok(out)
    }
}

fn resolve_extent(f: &CurvatureDensity, cfg: &PotentialConfig) -> Result<(f64, f64)> {
    let start = f.support().start();
    let natural = f.effective_radius();
    let end = cfg.r_max.unwrap_or(natural);
    if !(end > start) {
        return Err(invalid("truncation radius must exceed the support start"));
    }
    match f.support() {
        Support::Compact { radius, .. } if end < radius * (1.0 - 1e-12) => {
            let neglected = CurvatureDensity::compact(f.dimension(), "tail", end, radius, f.function())?.total();
            if neglected.abs() > cfg.tail_tol * f.total().abs().max(1e-300) {
                return Err(Error::TailNotConvergent {
                    radius: end,
                    detail: format!("truncation drops relative mass {:e}", neglected / f.total()),
                });
            }
        }
        Support::Decay { .. } => {
            if f.tail_estimate() > cfg.tail_tol * f.total().abs().max(1e-300) {
                return Err(Error::TailNotConvergent {
                    radius: end,
                    detail: format!("density tail estimate {:e} above tolerance", f.tail_estimate()),
                });
            }
            if end < natural {
                let tail = CurvatureDensity::decaying(f.dimension(), "tail", end, end, f.function())?;
                if tail.total().abs() > cfg.tail_tol * f.total().abs().max(1e-300) {
                    return Err(Error::TailNotConvergent {
                        radius: end,
                        detail: format!("truncation drops relative mass {:e}", tail.total() / f.total()),
                    });
                }
            }
        }
        _ => {}
    }
    Ok((start, end))
}

/// Builds the potential profile of `f`.
pub fn potential_from_density(f: &CurvatureDensity, cfg: &PotentialConfig) -> Result<RadialProfile> {
    let p = build_potential(f, cfg)?;
    RadialProfile::new(f.dimension(), ProfileKind::PotentialGenerated(Arc::new(p)))
}

fn build_potential(f: &CurvatureDensity, cfg: &PotentialConfig) -> Result<PotentialProfile> {
    let n = f.dimension();
    let (start, end) = resolve_extent(f, cfg)?;
    let disc = Discretization::new(n, start, end, cfg, f.kinks())?;
    let func = f.function();
    let g = disc.weighted(|s| func(s));
    let jets = disc.jets(&g, cfg.constant);
    let table = HermiteTable::new(disc.outputs.clone(), jets)?;
    Ok(PotentialProfile { n, source: f.clone(), constant: cfg.constant, disc, table })
}

/// A prescribed radial Q-curvature.
#[derive(Debug, Clone)]
pub enum QFunction {
    Constant(f64),
    /// `amplitude · e^{-(r/width)²}`
    Gaussian { amplitude: f64, width: f64 },
    /// Cubic spline through `(r, Q)` samples; zero outside the table.
    Tabulated(Arc<CubicSpline>),
}

impl QFunction {
    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(QFunction::Tabulated(Arc::new(CubicSpline::new(radii, values)?)))
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            QFunction::Constant(c) => *c,
            QFunction::Gaussian { amplitude, width } => amplitude * (-(r / width) * (r / width)).exp(),
            QFunction::Tabulated(s) => s.eval(r).map(|v| v[0]).unwrap_or(0.0),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            QFunction::Constant(_) => 0.0,
            QFunction::Gaussian { amplitude, width } => {
                -2.0 * r / (width * width) * amplitude * (-(r / width) * (r / width)).exp()
            }
            QFunction::Tabulated(s) => s.eval(r).map(|v| v[1]).unwrap_or(0.0),
        }
    }

    /// Radius beyond which `Q` is negligible, if it has one.
    pub fn effective_radius(&self) -> Option<f64> {
        match self {
            QFunction::Constant(c) if *c == 0.0 => Some(1.0),
            QFunction::Constant(_) => None,
            QFunction::Gaussian { width, .. } => Some(7.0 * width),
            QFunction::Tabulated(s) => Some(s.upper()),
        }
    }
}

/// Progress and outcome of the Picard iteration.
#[derive(Debug, Clone, Serialize)]
pub struct PicardState {
    pub residual: f64,
    pub damping: f64,
    pub iterations: usize,
    /// Residual of every accepted iterate.
    pub history: Vec<f64>,
}

pub const DAMPING_FLOOR: f64 = 1.0 / 64.0;
const MAX_PICARD_ITERATIONS: usize = 1000;

/// Solves `u = c∫(log s - F_n) Q e^{nu} s^{n-1} ds + C` by damped Picard iteration
/// `u ← (1-θ)u + θ T(u)`, halving `θ` whenever the residual grows.
pub fn picard_solve(
    q: &QFunction,
    u0: &RadialProfile,
    cfg: &PotentialConfig,
    damping: f64,
    tol: f64,
) -> Result<(RadialProfile, PicardState)> {
    let n = u0.dimension();
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(invalid("damping must lie in (0, 1]"));
    }
    let end = cfg
        .r_max
        .or_else(|| q.effective_radius())
        .unwrap_or(1e4);
    let disc = Discretization::new(n, 0.0, end, cfg, &[])?;
    let nodes = disc.grid.nodes().to_vec();
    let mut u: Vec<[f64; 3]> = disc
        .outputs
        .iter()
        .map(|&r| {
            let j = u0.jet(r, 2)?;
            Ok([j[0], j[1], j[2]])
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let q_nodes: Vec<f64> = nodes.iter().map(|&s| q.value(s)).collect();
    let transform = |u: &[[f64; 3]]| -> Result<Vec<[f64; 3]>> {
        let table = HermiteTable::new(disc.outputs.clone(), u.to_vec())?;
        let mut dens = Vec::with_capacity(nodes.len());
        for (&s, &qs) in nodes.iter().zip(&q_nodes) {
            let v = if qs == 0.0 { 0.0 } else { qs * (nf * table.eval(s)?[0]).exp() };
            if !v.is_finite() {
                return Err(Error::NonIntegrable(format!("Q e^{{nu}} overflows at r = {s}")));
            }
            dens.push(v);
        }
        check_integrable(&dens, &nodes, n)?;
        let mut it = dens.into_iter();
        let g = disc.weighted(|_| it.next().unwrap());
        Ok(disc.jets(&g, cfg.constant))
    };
    let residual_of = |a: &[[f64; 3]], b: &[[f64; 3]]| a.iter().zip(b).map(|(x, y)| (x[0] - y[0]).abs()).fold(0.0, f64::max);

    let mut theta = damping;
    let mut tu = transform(&u)?;
    let mut res = residual_of(&u, &tu);
    let mut history = vec![res];
    let mut iterations = 0;
    while res > tol {
        if iterations >= MAX_PICARD_ITERATIONS {
            return Err(Error::Divergence { iterations, residual: res });
        }
        let candidate: Vec<[f64; 3]> = u
            .iter()
            .zip(&tu)
            .map(|(a, b)| std::array::from_fn(|k| (1.0 - theta) * a[k] + theta * b[k]))
            .collect();
        iterations += 1;
        let t_candidate = match transform(&candidate) {
            Ok(t) => t,
            Err(Error::NonIntegrable(_)) if theta / 2.0 >= DAMPING_FLOOR => {
                theta /= 2.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let new_res = residual_of(&candidate, &t_candidate);
        if new_res > res && history.len() > 1 {
            theta /= 2.0;
            if theta < DAMPING_FLOOR {
                return Err(Error::Divergence { iterations, residual: res });
            }
            continue;
        }
        u = candidate;
        tu = t_candidate;
        res = new_res;
        history.push(res);
    }
    let table = HermiteTable::new(disc.outputs.clone(), u)?;
    let table_for_density = table.clone();
    let q_owned = q.clone();
    let density_fn = Arc::new(move |s: f64| {
        let qs = q_owned.value(s);
        if qs == 0.0 {
            0.0
        } else {
            table_for_density.eval(s).map(|j| qs * (nf * j[0]).exp()).unwrap_or(0.0)
        }
    });
    let source = CurvatureDensity::compact(n, "Q e^{nu}", 0.0, end, density_fn)?;
    let profile = PotentialProfile { n, source, constant: cfg.constant, disc, table };
    let state = PicardState { residual: res, damping: theta, iterations, history };
    Ok((RadialProfile::new(n, ProfileKind::PicardSolution(Arc::new(profile)))?, state))
}

/// Rejects iterate densities whose mass sits at the truncation radius.
fn check_integrable(dens: &[f64], nodes: &[f64], n: usize) -> Result<()> {
    let p = n as i32;
    let scale = dens
        .iter()
        .zip(nodes)
        .map(|(d, s)| (d * s.powi(p)).abs())
        .fold(0.0, f64::max);
    let last = dens.len().saturating_sub(1);
    let edge = (dens[last] * nodes[last].powi(p)).abs();
    if scale > 0.0 && edge > 1e-6 * scale {
        return Err(Error::NonIntegrable(format!(
            "r^n Q e^{{nu}} at the truncation radius is {:e} of its maximum",
            edge / scale
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::density_from_profile;

    #[test]
    fn zero_density_gives_the_constant() {
        let f = CurvatureDensity::zero(4).unwrap();
        let cfg = PotentialConfig { constant: 0.7, ..Default::default() };
        let u = potential_from_density(&f, &cfg).unwrap();
        for r in [0.0, 0.5, 30.0] {
            assert_eq!(u.eval(r, 0).unwrap(), 0.7);
            assert_eq!(u.eval(r, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn far_field_slope_matches_alpha() {
        let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
        let u = potential_from_density(&f, &PotentialConfig::default()).unwrap();
        for r in [100.0, 1000.0] {
            let ru = r * u.eval(r, 1).unwrap();
            assert!((ru + 0.5).abs() < 1e-4, "r u' = {ru}");
        }
        assert!((u.eval(1000.0, 0).unwrap() / 1000f64.ln() + 0.5).abs() < 0.01);
    }

    #[test]
    fn diagonal_jump_matches_kernel_one_sided_limits() {
        // jump of ∂_r^{n-1} F_n across s = r equals -(−1)^{n/2} / (c r^{n-1}).
        for n in [4usize, 6] {
            let r = 1.7;
            let d = 2e-5;
            let below = log_kernel_jet(n, r, r * (1.0 - d), n - 1)[n - 1];
            let above = log_kernel_jet(n, r, r * (1.0 + d), n - 1)[n - 1];
            let c = radial_potential_prefactor(n);
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let want = -sign / (c * r.powi(n as i32 - 1));
            assert!(((below - above) - want).abs() < 1e-3 * want.abs(), "n={n}: {} vs {want}", below - above);
        }
    }

    #[test]
    fn sphere_density_inverts_to_sphere() {
        let s = RadialProfile::sphere(4, 1.0).unwrap();
        let f = density_from_profile(&s).unwrap();
        let u = potential_from_density(&f, &PotentialConfig::default()).unwrap();
        let shift = 2f64.ln();
        for r in [0.0, 0.3, 1.0, 7.0, 50.0] {
            let diff = u.eval(r, 0).unwrap() - (s.eval(r, 0).unwrap() - shift);
            assert!(diff.abs() < 1e-7, "r={r} diff={diff}");
        }
    }

    #[test]
    fn truncation_below_support_is_rejected() {
        let f = CurvatureDensity::bump(4, 0.5, 2.0, 4).unwrap();
        let cfg = PotentialConfig { r_max: Some(1.0), ..Default::default() };
        assert!(matches!(potential_from_density(&f, &cfg), Err(Error::TailNotConvergent { .. })));
    }

    #[test]
    fn trivial_picard() {
        let u0 = RadialProfile::constant(4, 0.0).unwrap();
        let (u, st) = picard_solve(&QFunction::Constant(0.0), &u0, &PotentialConfig::default(), 0.5, 1e-12).unwrap();
        assert_eq!(st.iterations, 0);
        assert_eq!(u.eval(3.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn picard_rejects_bad_damping() {
        let u0 = RadialProfile::constant(4, 0.0).unwrap();
        assert!(picard_solve(&QFunction::Constant(0.0), &u0, &PotentialConfig::default(), 0.0, 1e-8).is_err());
    }
}
