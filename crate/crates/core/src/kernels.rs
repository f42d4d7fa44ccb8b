//! Spherical averages of the log and power kernels.
//!
//! For `x ∈ ∂B_r(0)` and `|y| = s` the distance satisfies
//! `|x-y|² = (r-s)² + 4rs sin²(θ/2)`, so every average reduces to a one-dimensional
//! integral over `θ ∈ [0, π]` with weight `sin^{n-2} θ`. The integrand is nearly
//! singular at `θ = 0` when `r ≈ s`; the angular rules refine dyadically toward it.
//! Averages are written in terms of `M = max(r, s)` and `t = min/max`, which makes
//! them symmetric in `(r, s)` by construction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{check_dimension, MAX_DIM};
use crate::error::{invalid, Result};
use crate::quadrature::{angular_rule, levels_for_scale, AngularRule};

/// Maximum number of radial derivatives of the log kernel that can be requested.
pub const MAX_JET: usize = MAX_DIM + 1;

fn ordered(r: f64, s: f64) -> (f64, f64) {
    if r >= s {
        (r, s / r)
    } else {
        (s, r / s)
    }
}

fn rule_for_ratio(n: usize, t: f64) -> &'static AngularRule {
    if t <= 0.0 {
        return angular_rule(n, 0);
    }
    angular_rule(n, levels_for_scale((1.0 - t) / t.sqrt()))
}

/// `⨍ log((1-t)² + 4t sin²(θ/2))`, the normalized angular log average.
fn log_average_unit(rule: &AngularRule, t: f64) -> f64 {
    let a = (1.0 - t) * (1.0 - t);
    rule.nodes
        .iter()
        .map(|nd| nd.weight * (a + 4.0 * t * nd.half_sin_sq).ln())
        .sum()
}

fn pow_average_unit(rule: &AngularRule, t: f64, k: f64) -> f64 {
    let a = (1.0 - t) * (1.0 - t);
    rule.nodes
        .iter()
        .map(|nd| nd.weight * (a + 4.0 * t * nd.half_sin_sq).powf(-0.5 * k))
        .sum()
}

fn check_even(n: usize) -> Result<()> {
    check_dimension(n)
}

/// `F_n(r, s)`: the average of `log|x-y|` over `x ∈ ∂B_r(0)` with `|y| = s`.
pub fn angular_log_avg(n: usize, r: f64, s: f64) -> Result<f64> {
    check_even(n)?;
    if !(r > 0.0) {
        return Err(invalid("angular_log_avg needs r > 0; use log s at the origin"));
    }
    if !(s >= 0.0) {
        return Err(invalid("angular_log_avg needs s >= 0"));
    }
    Ok(log_avg_unchecked(n, r, s))
}

pub(crate) fn log_avg_unchecked(n: usize, r: f64, s: f64) -> f64 {
    let (m, t) = ordered(r, s);
    if t == 0.0 {
        return m.ln();
    }
    m.ln() + 0.5 * log_average_unit(rule_for_ratio(n, t), t)
}

/// Average of `|x-y|^{-k}` over `x ∈ ∂B_r(0)` with `|y| = s`.
pub fn angular_pow_avg(n: usize, r: f64, s: f64, k: f64) -> Result<f64> {
    check_even(n)?;
    if !(r > 0.0) {
        return Err(invalid("angular_pow_avg needs r > 0"));
    }
    if !(s >= 0.0) {
        return Err(invalid("angular_pow_avg needs s >= 0"));
    }
    if !(k > 0.0) {
        return Err(invalid("power kernel exponent must be positive"));
    }
    if k >= (n - 1) as f64 {
        return Err(invalid(format!("power kernel exponent k = {k} >= n-1 is not integrable on r = s")));
    }
    let (m, t) = ordered(r, s);
    if t == 0.0 {
        return Ok(m.powf(-k));
    }
    Ok(m.powf(-k) * pow_average_unit(rule_for_ratio(n, t), t, k))
}

/// Quadrature nodes `(|y|, weight)` for `y ∈ ∂B_r(c e₁)`, graded toward the point of
/// the sphere closest to the origin. Weights sum to one.
pub fn offcenter_nodes(n: usize, c: f64, r: f64) -> Vec<(f64, f64)> {
    if c == 0.0 {
        return vec![(r, 1.0)];
    }
    let (m, t) = ordered(r, c);
    let rule = rule_for_ratio(n, t);
    let a = (1.0 - t) * (1.0 - t);
    rule.nodes
        .iter()
        .map(|nd| (m * (a + 4.0 * t * nd.half_sin_sq).sqrt(), nd.weight))
        .collect()
}

/// Average of the radial `field(|y|)` over the sphere `∂B_r(c e₁)`.
pub fn offcenter_radial_avg<F>(n: usize, mut field: F, c: f64, r: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_even(n)?;
    if !(r > 0.0) || !(c >= 0.0) {
        return Err(invalid("offcenter_radial_avg needs r > 0 and c >= 0"));
    }
    let mut acc = 0.0;
    for (d, w) in offcenter_nodes(n, c, r) {
        acc += w * field(d)?;
    }
    Ok(acc)
}

/// Radial derivatives `∂_r^k F_n(r, s)` for `k = 0..=order`, obtained by differentiating
/// under the angular integral: `∂_r^k log|x-y| = Re[(-1)^{k-1} (k-1)! / (r - s e^{iθ})^k]`.
///
/// Unlike [`angular_log_avg`] this accepts `r = 0`.
pub fn log_kernel_jet(n: usize, r: f64, s: f64, order: usize) -> [f64; MAX_JET] {
    assert!(order < MAX_JET);
    let mut out = [0.0; MAX_JET];
    out[0] = log_avg_unchecked(n, r, s);
    if order == 0 {
        return out;
    }
    if s == 0.0 {
        let mut fact = 1.0;
        for (k, slot) in out.iter_mut().enumerate().take(order + 1).skip(1) {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign * fact / r.powi(k as i32);
        }
        return out;
    }
    let (_, t) = ordered(r, s);
    let rule = rule_for_ratio(n, t);
    let mut acc = [0.0; MAX_JET];
    let diff = r - s;
    for nd in &rule.nodes {
        let w = Complex64::new(diff + 2.0 * s * nd.half_sin_sq, -s * nd.sin);
        let z = w.inv();
        let mut zk = z;
        for slot in acc.iter_mut().take(order + 1).skip(1) {
            *slot += nd.weight * zk.re;
            zk *= z;
        }
    }
    let mut fact = 1.0;
    for k in 1..=order {
        if k > 1 {
            fact *= (k - 1) as f64;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out[k] = sign * fact * acc[k];
    }
    out
}

/// Kernel family stored in a [`KernelTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "lowercase")]
pub enum KernelKind {
    Log,
    Power(f64),
}

impl KernelKind {
    pub fn label(&self) -> String {
        match self {
            KernelKind::Log => "log".to_string(),
            KernelKind::Power(k) => format!("pow{k}"),
        }
    }
}

/// Precomputed kernel averages on a square grid of radii, stored for `i <= j` only.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub n: usize,
    pub kind: KernelKind,
    radii: Vec<f64>,
    values: Vec<f64>,
    errors: Vec<f64>,
}

fn tri_index(i: usize, j: usize, len: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * len - a * (a + 1) / 2 + b
}

impl KernelTable {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[tri_index(i, j, self.radii.len())]
    }

    pub fn error_bound(&self, i: usize, j: usize) -> f64 {
        self.errors[tri_index(i, j, self.radii.len())]
    }

    fn build(n: usize, kind: KernelKind, radii: &[f64]) -> Result<Self> {
        check_even(n)?;
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(invalid("kernel table radii must be positive"));
        }
        if let KernelKind::Power(k) = kind {
            if !(k > 0.0) || k >= (n - 1) as f64 {
                return Err(invalid(format!("power kernel exponent {k} outside (0, n-1)")));
            }
        }
        let len = radii.len();
        let pairs: Vec<(usize, usize)> = (0..len).flat_map(|i| (i..len).map(move |j| (i, j))).collect();
        let entries: Vec<(f64, f64)> = pairs
            .par_iter()
            .map(|&(i, j)| entry_with_error(n, kind, radii[i], radii[j]))
            .collect();
        let (values, errors) = entries.into_iter().unzip();
        Ok(Self { n, kind, radii: radii.to_vec(), values, errors })
    }
}

/// Value and a-posteriori error estimate, the latter from re-evaluating with a
/// deeper angular refinement.
fn entry_with_error(n: usize, kind: KernelKind, r: f64, s: f64) -> (f64, f64) {
    let (m, t) = ordered(r, s);
    let base = rule_for_ratio(n, t);
    let deep = angular_rule(n, base.levels + 6);
    let eval = |rule: &AngularRule| match kind {
        KernelKind::Log => m.ln() + 0.5 * log_average_unit(rule, t),
        KernelKind::Power(k) => m.powf(-k) * pow_average_unit(rule, t, k),
    };
    let v = eval(base);
    let e = (eval(deep) - v).abs().max(4.0 * f64::EPSILON * v.abs());
    (v, e)
}

type TableKey = (usize, String, u64);

/// Cached kernel table keyed by `(n, kind, grid hash)`; rebuilt on a cache miss.
pub fn kernel_table(n: usize, kind: KernelKind, radii: &[f64]) -> Result<Arc<KernelTable>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<KernelTable>>>> = OnceLock::new();
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for r in radii {
        r.to_bits().hash(&mut h);
    }
    let key = (n, kind.label(), h.finish());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(KernelTable::build(n, kind, radii)?);
    cache.lock().unwrap().insert(key, table.clone());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4_closed(r: f64, s: f64) -> f64 {
        let (m, t) = ordered(r, s);
        m.ln() + t * t / 4.0
    }

    #[test]
    fn log_average_examples() {
        assert_eq!(angular_log_avg(4, 1.0, 0.0).unwrap(), 0.0);
        let want = 2f64.ln() + 1.0 / 16.0;
        assert!((angular_log_avg(4, 2.0, 1.0).unwrap() - want).abs() < 1e-12);
        assert!((angular_log_avg(4, 1.0, 2.0).unwrap() - want).abs() < 1e-12);
        assert!(angular_log_avg(4, 0.0, 1.0).is_err());
    }

    #[test]
    fn log_average_on_the_diagonal() {
        for r in [0.1, 1.0, 7.0] {
            let v = angular_log_avg(4, r, r).unwrap();
            assert!((v - f4_closed(r, r)).abs() < 1e-8, "r={r} v={v}");
        }
    }

    #[test]
    fn power_average_examples() {
        assert!((angular_pow_avg(4, 1.0, 3.0, 2.0).unwrap() - 1.0 / 9.0).abs() < 1e-13);
        assert_eq!(angular_pow_avg(4, 1.0, 0.0, 2.0).unwrap(), 1.0);
        assert!((angular_pow_avg(6, 2.0, 1.0, 4.0).unwrap() - 1.0 / 16.0).abs() < 1e-13);
        assert!(angular_pow_avg(4, 1.0, 1.0, 3.0).is_err());
        assert!(angular_pow_avg(4, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn offcenter_examples() {
        let one = offcenter_radial_avg(4, |_| Ok(1.0), 1.3, 0.4).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        let sq = offcenter_radial_avg(4, |d| Ok(d * d), 1.0, 2.0).unwrap();
        assert!((sq - 5.0).abs() < 1e-13);
        let inv = offcenter_radial_avg(4, |d| Ok(d.powi(-2)), 3.0, 1.0).unwrap();
        assert!((inv - 1.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn jet_matches_closed_form_derivatives_in_four_dimensions() {
        // For s < r: F = log r + s²/(4r²).
        let (r, s) = (2.0f64, 0.7f64);
        let j = log_kernel_jet(4, r, s, 3);
        let d1 = 1.0 / r - s * s / (2.0 * r.powi(3));
        let d2 = -1.0 / (r * r) + 1.5 * s * s / r.powi(4);
        let d3 = 2.0 / r.powi(3) - 6.0 * s * s / r.powi(5);
        assert!((j[0] - f4_closed(r, s)).abs() < 1e-13);
        assert!((j[1] - d1).abs() < 1e-13);
        assert!((j[2] - d2).abs() < 1e-13);
        assert!((j[3] - d3).abs() < 1e-12);
    }

    #[test]
    fn table_is_symmetric_and_cached() {
        let radii = [0.5, 1.0, 2.0, 4.0];
        let t = kernel_table(4, KernelKind::Log, &radii).unwrap();
        let t2 = kernel_table(4, KernelKind::Log, &radii).unwrap();
        assert!(Arc::ptr_eq(&t, &t2));
        assert_eq!(t.value(1, 3), t.value(3, 1));
        assert!((t.value(2, 1) - f4_closed(2.0, 1.0)).abs() < 1e-12);
        assert!(t.error_bound(1, 1) < 1e-8);
        assert!(kernel_table(4, KernelKind::Power(3.5), &radii).is_err());
    }
}
