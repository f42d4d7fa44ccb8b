use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qcurv_core::calculus::{q_curvature, radial_laplacian, scalar_curvature};
use qcurv_core::catalog::{DensitySpec, ProfileSpec, QSpec};
use qcurv_core::endmodel::{end_limits, end_nu, EndProfile, HTerm};
use qcurv_core::functionals::{conformal_mass, profile_alpha0, sphere_mean_limits, volume_entropy, Completeness};
use qcurv_core::harness::{
    determinism_digest, emit_report, report::render_json, report::render_text, run_suite, suite_passed, ReportFormat,
    SuiteConfig,
};
use qcurv_core::kernels::{kernel_table, KernelKind};
use qcurv_core::{picard_solve, potential_from_density, PotentialConfig, RadialProfile, Schedule};

#[derive(Parser)]
#[command(name = "qcurv", version, about = "Radial Q-curvature laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spherical kernel averages on a grid of radii, as a CSV matrix.
    KernelTable {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// `log` or a power exponent such as `2`.
        #[arg(long, default_value = "log")]
        kernel: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        radii: Vec<f64>,
    },
    /// u, Δu, Q and R of a profile.
    Curvature {
        /// Profile shorthand, e.g. `sphere:lambda=1` or `counterexample:beta=2,n=6`.
        #[arg(long)]
        profile: String,
        #[command(flatten)]
        radii: RadiiArgs,
    },
    /// Log-potential of a curvature density: r, u, u', u''.
    #[command(allow_negative_numbers = true)]
    Potential {
        /// Density shorthand, e.g. `bump:alpha0=0.5,radius=2`.
        #[arg(long)]
        density: String,
        #[arg(long, default_value_t = 0.0)]
        constant: f64,
        #[command(flatten)]
        radii: RadiiArgs,
    },
    /// Solve for a prescribed Q by damped Picard iteration: r, u, u', u''.
    #[command(allow_negative_numbers = true)]
    Solve {
        /// Q shorthand, e.g. `gaussian:amplitude=0.1,width=1`.
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        constant: f64,
        #[arg(long)]
        r_max: Option<f64>,
        /// Write the iteration history as JSON here.
        #[arg(long)]
        state: Option<PathBuf>,
        #[command(flatten)]
        radii: RadiiArgs,
    },
    /// α₀, spherical-mean limits, conformal mass and volume entropy as JSON.
    Functionals {
        #[arg(long)]
        profile: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0])]
        centers: Vec<f64>,
    },
    /// Limits of a four-dimensional end `w = P[f] + α₁ log r + h` as JSON.
    #[command(allow_negative_numbers = true)]
    End {
        #[arg(long, default_value_t = 0.0)]
        alpha1: f64,
        /// Density supported in `|y| >= 1`, e.g. `shell:alpha0=0.5,inner=1,outer=3`.
        #[arg(long)]
        density: Option<String>,
        #[arg(long, value_enum, default_value_t = HKind::Zero)]
        h: HKind,
        #[arg(long, default_value_t = 0.0)]
        h_coeff: f64,
    },
    /// Run the verification suite.
    Verify {
        /// TOML suite configuration; defaults are used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
        /// Only run these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HKind {
    Zero,
    Constant,
    InverseSquare,
}

#[derive(clap::Args)]
struct RadiiArgs {
    /// Explicit radii; overrides the log-spaced range.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    from: f64,
    #[arg(long, default_value_t = 100.0)]
    to: f64,
    #[arg(long, default_value_t = 31)]
    points: usize,
}

impl RadiiArgs {
    fn radii(&self) -> Result<Vec<f64>> {
        if !self.radii.is_empty() {
            return Ok(self.radii.clone());
        }
        if !(self.from > 0.0 && self.to > self.from && self.points >= 2) {
            bail!("need 0 < from < to and at least two points");
        }
        let ratio = (self.to / self.from).ln();
        Ok((0..self.points)
            .map(|i| self.from * (ratio * i as f64 / (self.points - 1) as f64).exp())
            .collect())
    }
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn jet_rows(p: &RadialProfile, radii: &[f64]) -> Result<Vec<Vec<f64>>> {
    radii
        .iter()
        .map(|&r| {
            let j = p.jet(r, 2)?;
            Ok(vec![r, j[0], j[1], j[2]])
        })
        .collect()
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::KernelTable { n, kernel, radii } => {
            let kind = if kernel == "log" {
                KernelKind::Log
            } else {
                KernelKind::Power(kernel.parse().with_context(|| format!("kernel `{kernel}`"))?)
            };
            let table = kernel_table(n, kind, &radii)?;
            let mut header = vec!["r".to_string()];
            header.extend(radii.iter().map(|s| format!("s={s}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = (0..radii.len()).map(|i| {
                let mut row = vec![radii[i]];
                row.extend((0..radii.len()).map(|j| table.value(i, j)));
                row
            });
            write_csv(&header, rows)?;
        }
        Command::Curvature { profile, radii } => {
            let p = ProfileSpec::parse(&profile)?.build()?;
            let rows = radii
                .radii()?
                .into_iter()
                .map(|r| Ok(vec![r, p.eval(r, 0)?, radial_laplacian(&p, r)?, q_curvature(&p, r)?, scalar_curvature(&p, r)?]))
                .collect::<Result<Vec<_>>>()?;
            write_csv(&["r", "u", "laplacian", "q", "scalar"], rows)?;
        }
        Command::Potential { density, constant, radii } => {
            let f = DensitySpec::parse(&density)?.build()?;
            let p = potential_from_density(&f, &PotentialConfig { constant, ..Default::default() })?;
            write_csv(&["r", "u", "u1", "u2"], jet_rows(&p, &radii.radii()?)?)?;
        }
        Command::Solve { q, n, damping, tol, constant, r_max, state, radii } => {
            let q = QSpec::parse(&q)?.build()?;
            let cfg = PotentialConfig { constant, r_max, ..Default::default() };
            let (p, st) = picard_solve(&q, &RadialProfile::constant(n, 0.0)?, &cfg, damping, tol)?;
            eprintln!("converged in {} iterations, residual {:e}, damping {}", st.iterations, st.residual, st.damping);
            if let Some(path) = state {
                std::fs::write(&path, serde_json::to_string_pretty(&st)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            write_csv(&["r", "u", "u1", "u2"], jet_rows(&p, &radii.radii()?)?)?;
        }
        Command::Functionals { profile, centers } => {
            let p = ProfileSpec::parse(&profile)?.build()?;
            let alpha0 = profile_alpha0(&p)?;
            let mean_limits = sphere_mean_limits(&p, &Schedule::standard())?;
            let mass = conformal_mass(&p, &centers, &Schedule::standard())?;
            let entropy = volume_entropy(&p, &Schedule::geometric(100.0, 10f64.powf(0.25), 9)?)?;
            print_json(&json!({
                "profile": p.label(),
                "alpha0": alpha0,
                "completeness": Completeness::from_alpha0(alpha0),
                "mean_limits": mean_limits,
                "mass": mass,
                "entropy": entropy,
            }))?;
        }
        Command::End { alpha1, density, h, h_coeff } => {
            let h = match h {
                HKind::Zero => HTerm::Zero,
                HKind::Constant => HTerm::Constant(h_coeff),
                HKind::InverseSquare => HTerm::InverseSquare(h_coeff),
            };
            let e = match density {
                Some(d) => EndProfile::new(DensitySpec::parse(&d)?.build()?, alpha1, h, &PotentialConfig::default())?,
                None => EndProfile::without_density(alpha1, h)?,
            };
            let s = Schedule::standard();
            print_json(&json!({
                "alpha1": e.alpha1(),
                "alpha2": e.alpha2(),
                "limits": end_limits(&e, &s)?,
                "nu": end_nu(&e, &s)?,
            }))?;
        }
        Command::Verify { config, json, only } => {
            let mut cfg = match config {
                Some(path) => SuiteConfig::load(&path).with_context(|| format!("loading {}", path.display()))?,
                None => SuiteConfig::default(),
            }
            .with_env_overrides();
            if !only.is_empty() {
                cfg.only = only;
            }
            let reports = run_suite(&cfg)?;
            for fmt in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Text] {
                emit_report(&reports, fmt, &cfg.output_dir)?;
            }
            if json {
                println!("{}", render_json(&reports)?);
            } else {
                print!("{}", render_text(&reports));
                println!("digest {}", determinism_digest(&reports)?);
            }
            return Ok(if suite_passed(&reports) { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
