//! Extrapolation of `r → ∞` limits from values on a radius schedule.
//!
//! The last four samples are fitted with `L + a x + b x²`, where `x = 1/r` for
//! algebraic approach and `x = 1/log r` for logarithmic approach, or with
//! `L + a r^{-p}` where the rate `p` comes from successive differences on a geometric
//! schedule. The reported error is `max(fit residual, |L - last|/4)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Asymptotic variable used by the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitScale {
    /// `x = 1/r`
    Power,
    /// `x = 1/log r`
    Log,
    /// `L + a r^{-p}` with fitted `p`; needs a geometric schedule.
    Rate,
    /// Pick the model that best predicts the earliest of the last four samples from
    /// the other three.
    Auto,
}

/// Geometric radius schedule `r_j = r₀ q^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub radii: Vec<f64>,
}

impl Schedule {
    pub fn geometric(r0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(r0 > 0.0 && ratio > 1.0) || count == 0 {
            return Err(invalid("schedule needs r0 > 0, ratio > 1 and at least one radius"));
        }
        Ok(Self { radii: (0..count).map(|j| r0 * ratio.powi(j as i32)).collect() })
    }

    pub fn new(mut radii: Vec<f64>) -> Result<Self> {
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.is_empty() || radii[0] <= 0.0 || radii.iter().any(|r| !r.is_finite()) {
            return Err(invalid("schedule radii must be finite and positive"));
        }
        Ok(Self { radii })
    }

    /// `{125, 250, 500, 1000}`
    pub fn standard() -> Self {
        Self { radii: vec![125.0, 250.0, 500.0, 1000.0] }
    }
}

/// Extrapolated limit of sampled values along a radius schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub error: f64,
    /// Observed algebraic order of the approach, when the differences allow one.
    pub order: Option<f64>,
    /// False when successive differences stop shrinking or a value is not finite.
    pub converged: bool,
    pub scale: LimitScale,
    /// Value predicted by theory, recorded for reporting.
    pub prediction: Option<f64>,
}

impl LimitEstimate {
    pub fn from_samples(radii: Vec<f64>, values: Vec<f64>, scale: LimitScale) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(invalid("a limit estimate needs at least two samples"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("schedule radii must increase"));
        }
        if scale == LimitScale::Log && radii[0] <= 1.0 {
            return Err(invalid("logarithmic extrapolation needs radii above 1"));
        }
        let finite = values.iter().all(|v| v.is_finite());
        let (limit, residual, used) = if !finite {
            (f64::NAN, f64::INFINITY, if scale == LimitScale::Auto { LimitScale::Power } else { scale })
        } else {
            match scale {
                LimitScale::Auto => {
                    let mut best = (LimitScale::Power, f64::INFINITY);
                    for cand in [LimitScale::Power, LimitScale::Log, LimitScale::Rate] {
                        if cand == LimitScale::Log && radii[0] <= 1.0 {
                            continue;
                        }
                        let miss = holdout_miss(&radii, &values, cand);
                        if miss < best.1 {
                            best = (cand, miss);
                        }
                    }
                    let (l, r) = fit(&radii, &values, best.0);
                    (l, r.max(best.1), best.0)
                }
                s => {
                    let (l, r) = fit(&radii, &values, s);
                    (l, r, s)
                }
            }
        };
        let last = *values.last().unwrap();
        let error = residual.max((limit - last).abs() / 4.0);
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let scale_ref = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let noise = 64.0 * f64::EPSILON * scale_ref;
        let shrinking = diffs.windows(2).all(|d| d[1].abs() <= d[0].abs() * (1.0 + 1e-9) + noise);
        let order = estimate_order(&radii, &diffs, noise);
        Ok(Self {
            radii,
            values,
            limit,
            error: if finite { error } else { f64::INFINITY },
            order,
            converged: finite && shrinking,
            scale: used,
            prediction: None,
        })
    }

    pub fn with_prediction(mut self, prediction: f64) -> Self {
        self.prediction = Some(prediction);
        self
    }

    /// Samples `f` on the schedule and extrapolates.
    pub fn sample(schedule: &Schedule, scale: LimitScale, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let values = schedule.radii.iter().map(|&r| f(r)).collect::<Result<Vec<_>>>()?;
        Self::from_samples(schedule.radii.clone(), values, scale)
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `|limit - target| <= tol`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.limit - target).abs() <= tol
    }

    /// Limit superior over sliding four-point windows: the largest window extrapolation,
    /// with the error of that window.
    pub fn limsup(radii: Vec<f64>, values: Vec<f64>, scale: LimitScale) -> Result<Self> {
        let full = Self::from_samples(radii.clone(), values.clone(), scale)?;
        if radii.len() <= 4 {
            return Ok(full);
        }
        let mut best = full;
        for start in 0..radii.len() - 4 {
            let w = Self::from_samples(radii[start..start + 4].to_vec(), values[start..start + 4].to_vec(), scale)?;
            if w.limit > best.limit {
                best.limit = w.limit;
                best.error = w.error.max((w.limit - best.last_value()).abs() / 4.0);
            }
        }
        Ok(best)
    }
}

/// Fits the model of `scale` on the last four samples; returns `(L, max residual)`.
fn fit(radii: &[f64], values: &[f64], scale: LimitScale) -> (f64, f64) {
    if scale == LimitScale::Rate {
        return fit_rate(radii, values);
    }
    let k = radii.len().min(4);
    let rs = &radii[radii.len() - k..];
    let vs = &values[values.len() - k..];
    let xs: Vec<f64> = rs
        .iter()
        .map(|&r| match scale {
            LimitScale::Log => 1.0 / r.ln(),
            _ => 1.0 / r,
        })
        .collect();
    // Normalize x by its largest value for conditioning.
    let x0 = xs[0];
    let ts: Vec<f64> = xs.iter().map(|x| x / x0).collect();
    let terms = k.min(3);
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (t, v) in ts.iter().zip(vs) {
        let basis = [1.0, *t, t * t];
        for i in 0..terms {
            atb[i] += basis[i] * v;
            for j in 0..terms {
                ata[i][j] += basis[i] * basis[j];
            }
        }
    }
    let coef = solve(ata, atb, terms);
    let residual = ts
        .iter()
        .zip(vs)
        .map(|(t, v)| {
            let basis = [1.0, *t, t * t];
            let model: f64 = (0..terms).map(|i| coef[i] * basis[i]).sum();
            (model - v).abs()
        })
        .fold(0.0, f64::max);
    (coef[0], residual)
}

/// How far the model through the last three samples misses the fourth-to-last.
fn holdout_miss(radii: &[f64], values: &[f64], scale: LimitScale) -> f64 {
    let k = radii.len();
    if k < 4 {
        return f64::INFINITY;
    }
    if scale == LimitScale::Rate {
        return fit_rate(radii, values).1;
    }
    let x = |r: f64| if scale == LimitScale::Log { 1.0 / r.ln() } else { 1.0 / r };
    let xs: Vec<f64> = radii[k - 4..].iter().map(|&r| x(r)).collect();
    let vs = &values[k - 4..];
    // Lagrange interpolation through samples 1..=3, evaluated at sample 0.
    let mut pred = 0.0;
    for i in 1..4 {
        let mut basis = 1.0;
        for j in 1..4 {
            if i != j {
                basis *= (xs[0] - xs[j]) / (xs[i] - xs[j]);
            }
        }
        pred += basis * vs[i];
    }
    (pred - vs[0]).abs()
}

/// `L + a r^{-p}` through the last three samples of a geometric schedule, with the
/// residual measured at the fourth-to-last sample.
fn fit_rate(radii: &[f64], values: &[f64]) -> (f64, f64) {
    let k = radii.len();
    if k < 4 {
        return (f64::NAN, f64::INFINITY);
    }
    let r = &radii[k - 4..];
    let v = &values[k - 4..];
    let q = r[3] / r[2];
    if r.windows(2).any(|w| ((w[1] / w[0]) / q - 1.0).abs() > 1e-9) {
        return (f64::NAN, f64::INFINITY);
    }
    let (d1, d2) = (v[2] - v[1], v[3] - v[2]);
    if d1 == 0.0 && d2 == 0.0 {
        let resid = (v[0] - v[3]).abs();
        return (v[3], resid);
    }
    let rho = d2 / d1;
    if !(rho > 0.0 && rho < 1.0) {
        return (f64::NAN, f64::INFINITY);
    }
    let limit = v[3] + d2 * rho / (1.0 - rho);
    let predicted = limit + (v[3] - limit) / rho.powi(3);
    (limit, (predicted - v[0]).abs())
}

fn solve(mut a: [[f64; 3]; 3], mut b: [f64; 3], m: usize) -> [f64; 3] {
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        if d == 0.0 {
            continue;
        }
        for row in col + 1..m {
            let f = a[row][col] / d;
            let pivot_row = a[col];
            for (dst, src) in a[row][col..m].iter_mut().zip(&pivot_row[col..m]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|c| a[row][c] * x[c]).sum();
        x[row] = if a[row][row] == 0.0 { 0.0 } else { (b[row] - s) / a[row][row] };
    }
    x
}

fn estimate_order(radii: &[f64], diffs: &[f64], noise: f64) -> Option<f64> {
    let n = diffs.len();
    if n < 2 {
        return None;
    }
    let (d0, d1) = (diffs[n - 2].abs(), diffs[n - 1].abs());
    if d0 <= noise || d1 <= noise {
        return None;
    }
    let q = radii[n] / radii[n - 1];
    Some((d0 / d1).ln() / q.ln())
}
