//! Independent reference values used by the suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const CHUNK: usize = 100_000;

/// Monte Carlo mean and standard error of a sample of `log|r ω - s e₁|` with `ω`
/// uniform on `S³`.
///
/// The sample is split into fixed-size chunks with their own seeds, so the result does
/// not depend on the number of worker threads.
pub fn f4_monte_carlo(r: f64, s: f64, samples: usize, seed: u64) -> (f64, f64) {
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let z: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let cos = z[0] / norm;
                let v = 0.5 * (r * r + s * s - 2.0 * r * s * cos).ln();
                sum += v;
                sq += v * v;
            }
            (sum, sq, count)
        })
        .collect();
    let (sum, sq, count) = sums.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let m = count as f64;
    let mean = sum / m;
    let var = (sq / m - mean * mean).max(0.0) * m / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// `log max(r, s) + min(r, s)² / (4 max(r, s)²)`.
pub fn f4_closed_form(r: f64, s: f64) -> f64 {
    let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
    hi.ln() + lo * lo / (4.0 * hi * hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let (mean, se) = f4_monte_carlo(1.0, 2.0, 200_000, 7);
        assert!((mean - f4_closed_form(1.0, 2.0)).abs() < 4.0 * se, "{mean} {se}");
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        assert_eq!(f4_monte_carlo(0.5, 1.0, 150_000, 3), f4_monte_carlo(0.5, 1.0, 150_000, 3));
    }
}
