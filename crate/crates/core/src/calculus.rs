//! Radial differential operators: `Δ`, `(-Δ)^m`, Q-curvature and scalar curvature.
//!
//! Closed-form profiles are differentiated symbolically. In `ρ = r²` the Laplacian is
//! `Δ g = 4ρ g'' + 2n g'`, and for a term `log(s + ρ)` every iterate is a polynomial
//! in `y = 1/(s + ρ)`:
//! `Δ log(s+ρ) = (2n-4) y + 4s y²` and
//! `Δ y^k = (4k(k+1) - 2nk) y^{k+1} - 4sk(k+1) y^{k+2}`.
//! Cancellations then happen between exact coefficients instead of between large
//! floating-point terms. Other profiles use the `r`-jet recurrence, with Taylor limits
//! at `r = 0`.

use crate::error::{invalid, Error, Result};
use crate::profiles::{ClosedForm, RadialProfile, Term};

/// Iterated Laplacians of a profile at a fixed dimension.
#[derive(Debug, Clone)]
pub struct OperatorStack<'a> {
    n: usize,
    profile: &'a RadialProfile,
    iterations: usize,
}

impl<'a> OperatorStack<'a> {
    /// Stack of `m = n/2` Laplacians, enough for the Q-curvature operator.
    pub fn new(profile: &'a RadialProfile) -> Self {
        let n = profile.dimension();
        Self { n, profile, iterations: n / 2 }
    }

    pub fn with_iterations(profile: &'a RadialProfile, iterations: usize) -> Self {
        Self { n: profile.dimension(), profile, iterations }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `[u, Δu, Δ²u, …, Δ^m u]` at `r`.
    pub fn levels(&self, r: f64) -> Result<Vec<f64>> {
        let m = self.iterations;
        let order = 2 * m;
        let available = self.profile.derivative_order();
        if order > available {
            return Err(Error::OrderTooHigh { requested: order, available });
        }
        if let Some(cf) = self.profile.closed_form() {
            return closed_form_levels(&cf, r, self.n, m);
        }
        let jet = self.profile.jet(r, order)?;
        if r == 0.0 {
            return Ok((0..=m).map(|j| taylor_iterated_laplacian(&jet, j, self.n)).collect());
        }
        let mut cur = jet;
        let mut out = Vec::with_capacity(m + 1);
        out.push(cur[0]);
        for _ in 0..m {
            cur = r_laplacian(&cur, r, self.n);
            out.push(cur[0]);
        }
        Ok(out)
    }
}

fn closed_form_levels(cf: &ClosedForm, r: f64, n: usize, m: usize) -> Result<Vec<f64>> {
    let rho = r * r;
    let nf = n as f64;
    let mut out = vec![0.0; m + 1];
    for term in &cf.terms {
        match *term {
            Term::Const(c) => out[0] += c,
            Term::Quadratic(a) => {
                out[0] += a * rho;
                if m >= 1 {
                    out[1] += 2.0 * nf * a;
                }
            }
            Term::LogShift { coef, shift } => {
                let x = shift + rho;
                if !(x > 0.0) {
                    return Err(invalid("logarithmic term is singular at the origin"));
                }
                let y = 1.0 / x;
                out[0] += coef * x.ln();
                // poly[k] is the coefficient of y^k
                let mut poly = vec![0.0, 2.0 * nf - 4.0, 4.0 * shift];
                for slot in out.iter_mut().skip(1) {
                    *slot += coef * poly.iter().rev().fold(0.0, |acc, c| acc * y + c);
                    let mut next = vec![0.0; poly.len() + 2];
                    for (k, &c) in poly.iter().enumerate().skip(1) {
                        let kf = k as f64;
                        next[k + 1] += c * (4.0 * kf * (kf + 1.0) - 2.0 * nf * kf);
                        next[k + 2] -= c * 4.0 * shift * kf * (kf + 1.0);
                    }
                    poly = next;
                }
            }
        }
    }
    Ok(out)
}

/// Jet of `Δu = u'' + (n-1) u'/r` from the jet of `u`, for `r > 0`.
pub fn r_laplacian(jet: &[f64], r: f64, n: usize) -> Vec<f64> {
    let order = jet.len() - 1;
    let inv = 1.0 / r;
    // d^m/dr^m (1/r) = (-1)^m m! / r^{m+1}
    let mut inv_derivs = vec![0.0; order.max(1)];
    let mut fact = 1.0;
    for (m, slot) in inv_derivs.iter_mut().enumerate() {
        if m > 0 {
            fact *= m as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * fact * inv.powi(m as i32 + 1);
    }
    (0..=order - 2)
        .map(|j| {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=j {
                if i > 0 {
                    binom = binom * (j - i + 1) as f64 / i as f64;
                }
                acc += binom * jet[i + 1] * inv_derivs[j - i];
            }
            jet[j + 2] + (n as f64 - 1.0) * acc
        })
        .collect()
}

/// `(Δ^j u)(0) = u^{(2j)}(0)/(2j)! · Π_{i=1}^{j} 2i(2i+n-2)` for smooth radial `u`.
fn taylor_iterated_laplacian(jet: &[f64], j: usize, n: usize) -> f64 {
    let mut coeff = jet[2 * j];
    for i in 1..=2 * j {
        coeff /= i as f64;
    }
    for i in 1..=j {
        coeff *= (2 * i) as f64 * (2 * i + n - 2) as f64;
    }
    coeff
}

/// `Δu(r) = u'' + (n-1)u'/r`, and `n u''(0)` at the origin.
pub fn radial_laplacian(p: &RadialProfile, r: f64) -> Result<f64> {
    let n = p.dimension() as f64;
    let d1 = p.eval(r, 1)?;
    let d2 = p.eval(r, 2)?;
    if r == 0.0 {
        return Ok(n * d2);
    }
    Ok(d2 + (n - 1.0) * d1 / r)
}

/// `((-Δ)^m u)(r)`.
pub fn polyharmonic(p: &RadialProfile, r: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return p.eval(r, 0);
    }
    let levels = OperatorStack::with_iterations(p, m).levels(r)?;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * levels[m])
}

/// `Q(r) = ((-Δ)^{n/2} u)(r) · e^{-n u(r)}`.
pub fn q_curvature(p: &RadialProfile, r: f64) -> Result<f64> {
    let n = p.dimension();
    let m = n / 2;
    let levels = OperatorStack::new(p).levels(r)?;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * levels[m] * (-(n as f64) * levels[0]).exp())
}

/// `|∇u|² = u'(r)²`.
pub fn gradient_sq(p: &RadialProfile, r: f64) -> Result<f64> {
    let d = p.eval(r, 1)?;
    Ok(d * d)
}

/// `R_g e^{2u} = 2(n-1)(-Δu - (n-2)/2 |∇u|²)`; free of exponentials.
pub fn scalar_curvature_weighted(p: &RadialProfile, r: f64) -> Result<f64> {
    let n = p.dimension() as f64;
    let lap = radial_laplacian(p, r)?;
    let g = gradient_sq(p, r)?;
    Ok(2.0 * (n - 1.0) * (-lap - 0.5 * (n - 2.0) * g))
}

/// `R_g = 2(n-1) e^{-2u} (-Δu - (n-2)/2 |∇u|²)`.
pub fn scalar_curvature(p: &RadialProfile, r: f64) -> Result<f64> {
    let u = p.eval(r, 0)?;
    Ok(scalar_curvature_weighted(p, r)? * (-2.0 * u).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{ClosedForm, Term};

    #[test]
    fn laplacian_examples() {
        let r2 = RadialProfile::quadratic(4, 1.0).unwrap();
        for r in [0.0, 0.3, 5.0] {
            assert!((radial_laplacian(&r2, r).unwrap() - 8.0).abs() < 1e-13);
        }
        let lr = RadialProfile::log_radius(4, 1.0).unwrap();
        assert!((radial_laplacian(&lr, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(radial_laplacian(&RadialProfile::constant(4, 2.0).unwrap(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn polyharmonic_examples() {
        let lr = RadialProfile::log_radius(4, 1.0).unwrap();
        assert!(polyharmonic(&lr, 1.0, 2).unwrap().abs() < 1e-13);
        let s = RadialProfile::sphere(4, 1.0).unwrap();
        assert!((polyharmonic(&s, 0.0, 2).unwrap() - 96.0).abs() < 1e-12);
        let c = RadialProfile::constant(6, 1.5).unwrap();
        for m in 1..=3 {
            assert_eq!(polyharmonic(&c, 0.7, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn q_curvature_of_spheres() {
        for lambda in [0.5, 1.0, 2.0] {
            let s4 = RadialProfile::sphere(4, lambda).unwrap();
            let s6 = RadialProfile::sphere(6, lambda).unwrap();
            for r in [0.0, 0.01, 1.0, 3.0, 10.0] {
                assert!((q_curvature(&s4, r).unwrap() - 6.0).abs() < 1e-11);
                assert!((q_curvature(&s6, r).unwrap() - 120.0).abs() < 1e-9);
            }
        }
        assert_eq!(q_curvature(&RadialProfile::constant(4, 0.0).unwrap(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn scalar_curvature_examples() {
        let s = RadialProfile::sphere(4, 1.0).unwrap();
        for r in [0.0, 0.5, 9.0] {
            assert!((scalar_curvature(&s, r).unwrap() - 12.0).abs() < 1e-12);
        }
        assert_eq!(scalar_curvature(&RadialProfile::constant(4, 1.0).unwrap(), 2.0).unwrap(), 0.0);
        let u1 = RadialProfile::counterexample(4, 0.0).unwrap();
        assert!((scalar_curvature(&u1, 0.0).unwrap() + 48.0).abs() < 1e-12);
    }

    #[test]
    fn r_jet_recurrence_agrees_with_rho_recurrence() {
        // A sampled-free check: run the r-jet path on a closed form by hand.
        let cf = ClosedForm::new(vec![Term::LogShift { coef: -0.7, shift: 2.0 }, Term::Quadratic(0.3)]);
        let p = RadialProfile::elementary(6, cf.clone()).unwrap();
        for r in [0.4, 1.0, 3.0] {
            let mut jet = cf.r_jet(r, 6).unwrap();
            for _ in 0..3 {
                jet = r_laplacian(&jet, r, 6);
            }
            let want = -polyharmonic(&p, r, 3).unwrap();
            assert!((jet[0] - want).abs() < 1e-10 * want.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn order_too_high_for_sampled() {
        let s = crate::profiles::SampledProfile::from_fn(0.1, 10.0, 30, |r| r).unwrap();
        let p = RadialProfile::sampled(4, s).unwrap();
        assert!(matches!(q_curvature(&p, 1.0), Err(Error::OrderTooHigh { .. })));
    }
}
