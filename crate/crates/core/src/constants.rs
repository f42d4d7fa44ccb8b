//! Geometric constants of the unit spheres and the normalizations built on them.
//!
//! All values are computed from the Gamma-function formula
//! `|S^m| = 2 π^{(m+1)/2} / Γ((m+1)/2)` and cached per dimension.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Largest dimension for which constants are cached.
pub const MAX_DIM: usize = 16;

/// Surface measure of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        (0..=MAX_DIM + 1)
            .map(|k| {
                let a = (k as f64 + 1.0) / 2.0;
                2.0 * PI.powf(a) / gamma(a)
            })
            .collect()
    });
    match table.get(m) {
        Some(v) => *v,
        None => {
            let a = (m as f64 + 1.0) / 2.0;
            2.0 * PI.powf(a) / gamma(a)
        }
    }
}

/// `k!` as a float.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Validates that `n` is an even dimension `>= 4`.
pub fn check_dimension(n: usize) -> Result<()> {
    if n >= 4 && n.is_multiple_of(2) && n <= MAX_DIM {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Total curvature of the round sphere, `(n-1)! |S^n|`.
pub fn sphere_total_curvature(n: usize) -> f64 {
    factorial(n - 1) * sphere_area(n)
}

/// Normalization turning `∫ Q e^{nu}` into `α₀`, i.e. `2 / ((n-1)! |S^n|)`.
pub fn alpha_normalization(n: usize) -> f64 {
    2.0 / sphere_total_curvature(n)
}

/// Radial form of the log-potential prefactor: `2 |S^{n-1}| / ((n-1)! |S^n|)`.
///
/// With it, `u(r) = c ∫₀^∞ K(r,s) f(s) s^{n-1} ds` for radial densities.
pub fn radial_potential_prefactor(n: usize) -> f64 {
    alpha_normalization(n) * sphere_area(n - 1)
}

/// Euclidean volume of the ball of radius `r` in `R^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    sphere_area(n - 1) * r.powi(n as i32) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_dimensional_spheres() {
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        assert!(rel(sphere_area(1), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(2), 4.0 * PI) < 1e-14);
        assert!(rel(sphere_area(3), 2.0 * PI * PI) < 1e-14);
        assert!(rel(sphere_area(4), 8.0 * PI * PI / 3.0) < 1e-14);
        assert!(rel(sphere_area(5), PI.powi(3)) < 1e-14);
    }

    #[test]
    fn four_sphere_total_curvature_is_16_pi_squared() {
        let v = sphere_total_curvature(4);
        assert!((v / (16.0 * PI * PI) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn prefactor_in_four_dimensions_is_one_quarter() {
        assert!((radial_potential_prefactor(4) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_and_small_dimensions() {
        assert!(check_dimension(3).is_err());
        assert!(check_dimension(2).is_err());
        assert!(check_dimension(5).is_err());
        assert!(check_dimension(6).is_ok());
    }
}
