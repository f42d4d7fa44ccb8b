//! Suite configuration, read from TOML.
//!
//! ```toml
//! dimensions = [4, 6]
//! centers = [0.0, 1.0, 2.0]
//! output_dir = "qcurv-out"
//! parallelism = 0          # 0 uses every core
//! seed = 20240611
//! only = []                # restrict to these check ids
//!
//! [schedules]
//! asymptotic = [125.0, 250.0, 500.0, 1000.0]
//!
//! [tolerances]
//! mass = 0.01
//!
//! [[roster]]
//! family = "sphere"
//! lambda = 1.0
//! ```
//!
//! `QCURV_OUT_DIR` overrides `output_dir`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{DensitySpec, ProfileSpec, QSpec};
use crate::error::{Error, Result};
use crate::limits::Schedule;

pub const OUT_DIR_ENV: &str = "QCURV_OUT_DIR";

/// Radius schedules used by the asymptotic checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedules {
    pub asymptotic: Vec<f64>,
    pub entropy: Vec<f64>,
    pub end: Vec<f64>,
}

impl Default for Schedules {
    fn default() -> Self {
        Self {
            asymptotic: Schedule::standard().radii,
            entropy: (0..9).map(|j| 100.0 * 10f64.powf(0.25 * j as f64)).collect(),
            end: Schedule::standard().radii,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub dimensions: Vec<usize>,
    pub roster: Vec<ProfileSpec>,
    pub schedules: Schedules,
    pub centers: Vec<f64>,
    /// Overrides of the default tolerance of each check family.
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub parallelism: usize,
    /// Seed of the randomized checks.
    pub seed: u64,
    /// Samples of the Monte Carlo kernel oracle.
    pub monte_carlo_samples: usize,
    /// Restrict the run to these check ids; empty runs all.
    pub only: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dimensions: vec![4, 6],
            roster: default_roster(),
            schedules: Schedules::default(),
            centers: vec![0.0, 1.0, 2.0],
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("qcurv-out"),
            parallelism: 0,
            seed: 20240611,
            monte_carlo_samples: 10_000_000,
            only: Vec::new(),
        }
    }
}

/// Spheres, counterexamples, the flat and `-|x|²` profiles, bump potentials and a
/// Picard solution.
pub fn default_roster() -> Vec<ProfileSpec> {
    let mut roster: Vec<ProfileSpec> = [0.5, 1.0, 2.0].iter().map(|&lambda| ProfileSpec::Sphere { lambda, n: 4 }).collect();
    roster.extend([-1.0, 1.0, 2.0].iter().map(|&beta| ProfileSpec::Counterexample { beta, n: 4 }));
    roster.push(ProfileSpec::Constant { value: 0.0, n: 4 });
    roster.push(ProfileSpec::Quadratic { coeff: -1.0, n: 4 });
    roster.extend([0.25, 0.5, 1.0].iter().map(|&alpha0| ProfileSpec::Potential {
        density: DensitySpec::Bump { alpha0, radius: 2.0, power: 4, n: 4 },
        constant: 0.0,
    }));
    roster.push(ProfileSpec::Picard {
        q: QSpec::Gaussian { amplitude: 0.1, width: 1.0 },
        n: 4,
        damping: 0.5,
        tol: 1e-10,
        constant: 0.0,
        r_max: None,
    });
    roster
}

/// Default tolerance of every check family.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("kernel_exact", 1e-10),
        ("kernel_bound", 1e-12),
        ("f4_closed_form", 1e-9),
        ("monte_carlo_sigma", 3.0),
        ("sphere_q", 1e-8),
        ("sphere_volume_rel", 1e-6),
        ("sphere_alpha0", 1e-6),
        ("counterexample_rel", 1e-2),
        ("roundtrip", 1e-6),
        ("asymptotic_rel", 1e-2),
        ("ball_mean_rel", 2e-2),
        ("mass", 1e-2),
        ("entropy", 0.05),
        ("picard_residual", 1e-8),
        ("picard_q", 1e-6),
        ("pohozaev_rel", 1e-3),
        ("end_flat", 1e-3),
        ("end_log", 1e-3),
        ("end_compact", 1e-2),
        ("sign_eps", 0.02),
        ("jensen", 1e-12),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Applies the output-directory environment override.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            self.output_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn tolerance(&self, family: &str) -> f64 {
        self.tolerances
            .get(family)
            .copied()
            .or_else(|| default_tolerances().get(family).copied())
            .unwrap_or_else(|| panic!("unknown tolerance family `{family}`"))
    }

    pub fn tolerance_overridden(&self, family: &str) -> bool {
        self.tolerances.get(family).is_some_and(|v| Some(v) != default_tolerances().get(family))
    }

    pub fn validate(&self, known_ids: &[&str]) -> Result<()> {
        let defaults = default_tolerances();
        for key in self.tolerances.keys() {
            if !defaults.contains_key(key) {
                return Err(Error::Config(format!("unknown tolerance family `{key}`")));
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be finite and nonnegative")));
            }
        }
        for id in &self.only {
            if !known_ids.contains(&id.as_str()) {
                return Err(Error::Config(format!("unknown check id `{id}`")));
            }
        }
        for d in &self.dimensions {
            crate::constants::check_dimension(*d)?;
        }
        for (name, radii) in [("asymptotic", &self.schedules.asymptotic), ("entropy", &self.schedules.entropy), ("end", &self.schedules.end)]
        {
            if radii.len() < 4 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 1.0 {
                return Err(Error::Config(format!(
                    "schedule `{name}` needs at least four increasing radii above 1"
                )));
            }
        }
        if self.centers.is_empty() || self.centers.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Config("centers must be nonempty and nonnegative".into()));
        }
        if self.monte_carlo_samples < 1000 {
            return Err(Error::Config("monte_carlo_samples must be at least 1000".into()));
        }
        Ok(())
    }
}
