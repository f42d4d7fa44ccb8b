//! Interpolants used by tabulated radial profiles.

use crate::error::{Error, Result};

/// Quintic Hermite interpolation of `(u, u', u'')` tabulated at increasing radii.
///
/// Panels away from the origin interpolate in `t = log r`, where profiles with
/// logarithmic far fields are nearly polynomial; a panel starting at `r = 0` uses `r`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    radii: Vec<f64>,
    jets: Vec<[f64; 3]>,
}

fn quintic(u0: [f64; 3], u1: [f64; 3], h: f64, t: f64) -> [f64; 3] {
    let c0 = u0[0];
    let c1 = h * u0[1];
    let c2 = 0.5 * h * h * u0[2];
    let big_a = u1[0] - (c0 + c1 + c2);
    let big_b = h * u1[1] - (c1 + 2.0 * c2);
    let big_c = h * h * u1[2] - 2.0 * c2;
    let c3 = 10.0 * big_a - 4.0 * big_b + 0.5 * big_c;
    let c4 = -15.0 * big_a + 7.0 * big_b - big_c;
    let c5 = 6.0 * big_a - 3.0 * big_b + 0.5 * big_c;
    let p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    let dp = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
    let ddp = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
    [p, dp / h, ddp / (h * h)]
}

/// `(u, r u', r² u'' + r u')`: the jet in `t = log r`.
fn to_log_jet(r: f64, j: [f64; 3]) -> [f64; 3] {
    [j[0], r * j[1], r * r * j[2] + r * j[1]]
}

impl HermiteTable {
    pub fn new(radii: Vec<f64>, jets: Vec<[f64; 3]>) -> Result<Self> {
        if radii.len() != jets.len() || radii.len() < 2 {
            return Err(Error::InvalidArgument("Hermite table needs matching radii and jets (>= 2)".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
            return Err(Error::InvalidArgument("Hermite table radii must be nonnegative and increase strictly".into()));
        }
        Ok(Self { radii, jets })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn jets(&self) -> &[[f64; 3]] {
        &self.jets
    }
    pub fn lower(&self) -> f64 {
        self.radii[0]
    }
    pub fn upper(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Returns `(u, u', u'')` at `r`.
    pub fn eval(&self, r: f64) -> Result<[f64; 3]> {
        let (lo, hi) = (self.lower(), self.upper());
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfGrid { r, min: lo, max: hi });
        }
        let i = self.radii.partition_point(|&x| x <= r).saturating_sub(1).min(self.radii.len() - 2);
        let (a, b) = (self.radii[i], self.radii[i + 1]);
        if a == 0.0 {
            let h = b - a;
            return Ok(quintic(self.jets[i], self.jets[i + 1], h, (r - a) / h));
        }
        if r == a {
            return Ok(self.jets[i]);
        }
        if r == b {
            return Ok(self.jets[i + 1]);
        }
        let h = (b / a).ln();
        let [u, ut, utt] = quintic(to_log_jet(a, self.jets[i]), to_log_jet(b, self.jets[i + 1]), h, (r / a).ln() / h);
        Ok([u, ut / r, (utt - ut) / (r * r)])
    }
}

/// Natural cubic spline of `y(x)`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 3 {
            return Err(Error::InvalidArgument("cubic spline needs >= 3 matching samples".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("spline abscissae must increase strictly".into()));
        }
        // Tridiagonal system for the second derivatives, natural end conditions.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    pub fn lower(&self) -> f64 {
        self.x[0]
    }
    pub fn upper(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Returns `(y, y', y'')` at `t`.
    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        let (lo, hi) = (self.lower(), self.upper());
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfGrid { r: t, min: lo, max: hi });
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(self.x.len() - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let ddv = a * m0 + b * m1;
        Ok([v, dv, ddv])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_quintics_on_the_origin_panel() {
        let f = |r: f64| [1.0 + r - 2.0 * r.powi(3) + 0.5 * r.powi(5), 1.0 - 6.0 * r * r + 2.5 * r.powi(4), -12.0 * r + 10.0 * r.powi(3)];
        let table = HermiteTable::new(vec![0.0, 0.7], vec![f(0.0), f(0.7)]).unwrap();
        for r in [0.0, 0.1, 0.35, 0.69, 0.7] {
            let got = table.eval(r).unwrap();
            let want = f(r);
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-11, "r={r} k={k}");
            }
        }
        assert!(table.eval(0.71).is_err());
    }

    #[test]
    fn hermite_reproduces_quintics_in_log_radius() {
        // u = P(log r) with P quintic; u' = P'/r, u'' = (P'' - P')/r².
        let p = |t: f64| [2.0 - t + 0.3 * t.powi(3) - 0.05 * t.powi(5), -1.0 + 0.9 * t * t - 0.25 * t.powi(4), 1.8 * t - t.powi(3)];
        let f = |r: f64| {
            let [a, b, c] = p(r.ln());
            [a, b / r, (c - b) / (r * r)]
        };
        let radii = vec![0.5, 1.3, 7.0, 40.0];
        let table = HermiteTable::new(radii.clone(), radii.iter().map(|&r| f(r)).collect()).unwrap();
        for r in [0.5, 0.9, 2.0, 6.99, 20.0, 40.0] {
            let got = table.eval(r).unwrap();
            let want = f(r);
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-10 * want[k].abs().max(1.0), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn spline_tracks_smooth_function() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        let [v, d, _] = s.eval(3.3).unwrap();
        assert!((v - 3.3f64.sin()).abs() < 1e-6);
        assert!((d - 3.3f64.cos()).abs() < 1e-4);
    }
}
