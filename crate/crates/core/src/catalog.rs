//! Named, serializable descriptions of profiles, densities and prescribed Q.
//!
//! Specs deserialize from TOML tables such as `{ family = "sphere", lambda = 1.0 }`
//! and parse from the command-line shorthand `sphere:lambda=1,n=4`.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{picard_solve, potential_from_density, PotentialConfig, QFunction};
use crate::profiles::{density_from_profile, CurvatureDensity, RadialProfile, SampledProfile};

fn four() -> usize {
    4
}
fn default_power() -> u32 {
    4
}
fn default_damping() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `A (1 - (s/R)²)^p` on `[0, R]` with prescribed `α₀`.
    Bump {
        alpha0: f64,
        radius: f64,
        #[serde(default = "default_power")]
        power: u32,
        #[serde(default = "four")]
        n: usize,
    },
    /// `A ((s-a)(b-s))^p` on `[a, b]` with prescribed `α₀`.
    Shell {
        alpha0: f64,
        inner: f64,
        outer: f64,
        #[serde(default = "default_power")]
        power: u32,
        #[serde(default = "four")]
        n: usize,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default = "four")]
        n: usize,
    },
    /// The curvature density of the round sphere profile.
    Sphere {
        lambda: f64,
        #[serde(default = "four")]
        n: usize,
    },
    /// CSV with columns `r, value`.
    Tabulated {
        path: PathBuf,
        #[serde(default = "four")]
        n: usize,
    },
    Zero {
        #[serde(default = "four")]
        n: usize,
    },
}

impl DensitySpec {
    pub fn build(&self) -> Result<CurvatureDensity> {
        match self {
            DensitySpec::Bump { alpha0, radius, power, n } => CurvatureDensity::bump(*n, *alpha0, *radius, *power),
            DensitySpec::Shell { alpha0, inner, outer, power, n } => {
                CurvatureDensity::shell(*n, *alpha0, *inner, *outer, *power)
            }
            DensitySpec::Gaussian { amplitude, width, n } => CurvatureDensity::gaussian(*n, *amplitude, *width),
            DensitySpec::Sphere { lambda, n } => density_from_profile(&RadialProfile::sphere(*n, *lambda)?),
            DensitySpec::Tabulated { path, n } => {
                let (r, v) = read_two_columns(path)?;
                CurvatureDensity::tabulated(*n, r, v)
            }
            DensitySpec::Zero { n } => CurvatureDensity::zero(*n),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_shorthand(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum QSpec {
    Constant { value: f64 },
    Gaussian { amplitude: f64, width: f64 },
    Tabulated { path: PathBuf },
}

impl QSpec {
    pub fn build(&self) -> Result<QFunction> {
        match self {
            QSpec::Constant { value } => Ok(QFunction::Constant(*value)),
            QSpec::Gaussian { amplitude, width } => Ok(QFunction::Gaussian { amplitude: *amplitude, width: *width }),
            QSpec::Tabulated { path } => {
                let (r, v) = read_two_columns(path)?;
                QFunction::tabulated(r, v)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_shorthand(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `log(2λ/(λ² + r²))`
    Sphere {
        lambda: f64,
        #[serde(default = "four")]
        n: usize,
    },
    /// `-β log(1 + r²) + r²`
    Counterexample {
        beta: f64,
        #[serde(default = "four")]
        n: usize,
    },
    Constant {
        value: f64,
        #[serde(default = "four")]
        n: usize,
    },
    /// `a r²`; `a = -1` is the non-normal `-|x|²`.
    Quadratic {
        coeff: f64,
        #[serde(default = "four")]
        n: usize,
    },
    /// Log-potential of a density.
    Potential {
        density: DensitySpec,
        #[serde(default)]
        constant: f64,
    },
    /// Picard solution for prescribed Q, started from `u ≡ 0`.
    Picard {
        q: QSpec,
        #[serde(default = "four")]
        n: usize,
        #[serde(default = "default_damping")]
        damping: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default)]
        constant: f64,
        r_max: Option<f64>,
    },
    /// CSV with columns `r, value`.
    Tabulated {
        path: PathBuf,
        #[serde(default = "four")]
        n: usize,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<RadialProfile> {
        match self {
            ProfileSpec::Sphere { lambda, n } => RadialProfile::sphere(*n, *lambda),
            ProfileSpec::Counterexample { beta, n } => RadialProfile::counterexample(*n, *beta),
            ProfileSpec::Constant { value, n } => RadialProfile::constant(*n, *value),
            ProfileSpec::Quadratic { coeff, n } => RadialProfile::quadratic(*n, *coeff),
            ProfileSpec::Potential { density, constant } => {
                let cfg = PotentialConfig { constant: *constant, ..Default::default() };
                potential_from_density(&density.build()?, &cfg)
            }
            ProfileSpec::Picard { q, n, damping, tol, constant, r_max } => {
                let cfg = PotentialConfig { constant: *constant, r_max: *r_max, ..Default::default() };
                let u0 = RadialProfile::constant(*n, 0.0)?;
                Ok(picard_solve(&q.build()?, &u0, &cfg, *damping, *tol)?.0)
            }
            ProfileSpec::Tabulated { path, n } => {
                let (r, v) = read_two_columns(path)?;
                RadialProfile::sampled(*n, SampledProfile::from_samples(r, v)?)
            }
        }
    }

    /// Stable short label, used as a report key.
    pub fn label(&self) -> String {
        match self {
            ProfileSpec::Sphere { lambda, n } => format!("sphere(lambda={lambda},n={n})"),
            ProfileSpec::Counterexample { beta, n } => format!("counterexample(beta={beta},n={n})"),
            ProfileSpec::Constant { value, n } => format!("constant({value},n={n})"),
            ProfileSpec::Quadratic { coeff, n } => format!("quadratic({coeff},n={n})"),
            ProfileSpec::Potential { density, .. } => format!("potential[{}]", density_label(density)),
            ProfileSpec::Picard { q, n, .. } => format!("picard[{},n={n}]", q_label(q)),
            ProfileSpec::Tabulated { path, n } => format!("tabulated({},n={n})", path.display()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_shorthand(text)
    }
}

fn density_label(d: &DensitySpec) -> String {
    match d {
        DensitySpec::Bump { alpha0, radius, power, n } => format!("bump(alpha0={alpha0},R={radius},p={power},n={n})"),
        DensitySpec::Shell { alpha0, inner, outer, power, n } => {
            format!("shell(alpha0={alpha0},[{inner},{outer}],p={power},n={n})")
        }
        DensitySpec::Gaussian { amplitude, width, n } => format!("gaussian({amplitude},{width},n={n})"),
        DensitySpec::Sphere { lambda, n } => format!("sphere(lambda={lambda},n={n})"),
        DensitySpec::Tabulated { path, n } => format!("tabulated({},n={n})", path.display()),
        DensitySpec::Zero { n } => format!("zero(n={n})"),
    }
}

fn q_label(q: &QSpec) -> String {
    match q {
        QSpec::Constant { value } => format!("Q={value}"),
        QSpec::Gaussian { amplitude, width } => format!("Q={amplitude}*exp(-(r/{width})^2)"),
        QSpec::Tabulated { path } => format!("Q=tabulated({})", path.display()),
    }
}

/// Parses `family:key=value,key=value` into any of the shorthand descriptions.
fn parse_shorthand<T: DeserializeOwned>(text: &str) -> Result<T> {
    let (family, rest) = match text.split_once(':') {
        Some((f, r)) => (f.trim(), r),
        None => (text.trim(), ""),
    };
    let mut table = toml::Table::new();
    table.insert("family".into(), toml::Value::String(family.replace('-', "_")));
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        table.insert(k.trim().to_string(), scalar(v.trim()));
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Config(format!("cannot interpret `{text}`: {e}")))
}

fn scalar(v: &str) -> toml::Value {
    if let Ok(i) = v.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = v.parse::<f64>() {
        return toml::Value::Float(f);
    }
    match v {
        "true" => toml::Value::Boolean(true),
        "false" => toml::Value::Boolean(false),
        _ => toml::Value::String(v.to_string()),
    }
}

/// Reads a CSV with numeric columns `r, value` (a header row is allowed).
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Config(format!("{}: row {} needs two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                r.push(a);
                v.push(b);
            }
            _ if i == 0 => continue,
            _ => return Err(Error::Config(format!("{}: row {} is not numeric", path.display(), i + 1))),
        }
    }
    Ok((r, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_round_trips_to_specs() {
        assert_eq!(ProfileSpec::parse("sphere:lambda=1").unwrap(), ProfileSpec::Sphere { lambda: 1.0, n: 4 });
        assert_eq!(
            ProfileSpec::parse("counterexample:beta=-1,n=6").unwrap(),
            ProfileSpec::Counterexample { beta: -1.0, n: 6 }
        );
        assert_eq!(
            DensitySpec::parse("bump:alpha0=0.5,radius=2").unwrap(),
            DensitySpec::Bump { alpha0: 0.5, radius: 2.0, power: 4, n: 4 }
        );
        assert_eq!(QSpec::parse("gaussian:amplitude=0.1,width=1").unwrap(), QSpec::Gaussian { amplitude: 0.1, width: 1.0 });
        assert!(ProfileSpec::parse("sphere:lambda").is_err());
        assert!(ProfileSpec::parse("torus:r=1").is_err());
        assert!(ProfileSpec::parse("sphere:lambda=1,colour=2").is_err());
    }

    #[test]
    fn toml_tables_deserialize() {
        let text = r#"
            family = "potential"
            density = { family = "bump", alpha0 = 0.5, radius = 2.0 }
        "#;
        let spec: ProfileSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.label(), "potential[bump(alpha0=0.5,R=2,p=4,n=4)]");
    }

    #[test]
    fn csv_columns_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        std::fs::write(&path, "r,value\n0,1\n1,0.5\n2,0.25\n").unwrap();
        let (r, v) = read_two_columns(&path).unwrap();
        assert_eq!(r, vec![0.0, 1.0, 2.0]);
        assert_eq!(v, vec![1.0, 0.5, 0.25]);
    }
}
