//! Runs the default verification suite and prints one line per acceptance criterion.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use qcurv_core::harness::{emit_report, run_suite, CheckReport, ReportFormat, SuiteConfig};

const CRITERIA: &[(&str, &[&str])] = &[
    ("1  kernel exactness (Newtonian spherical mean)", &["kernel.lieb_loss"]),
    ("2  kernel mean-value bound", &["kernel.mean_value_bound"]),
    ("3  F4 closed form and Monte Carlo oracle", &["kernel.f4_closed_form", "kernel.f4_monte_carlo"]),
    ("4  sphere curvature, volume and alpha0", &["curvature.sphere_q", "curvature.sphere_volume", "curvature.sphere_alpha0"]),
    ("5  counterexample total curvature", &["curvature.counterexample_mass"]),
    ("6  normal representation round trip", &["potential.sphere_roundtrip"]),
    ("7  spherical-mean asymptotics", &["asymptotic.laplacian", "asymptotic.slope", "asymptotic.gradient", "asymptotic.log_ratio"]),
    ("8  conformal mass identity", &["mass.identity", "mass.sphere"]),
    ("9  volume entropy", &["entropy.potential", "entropy.sphere", "entropy.sphere_flag"]),
    ("10 Picard solve and Pohozaev mass", &["picard.residual", "picard.pohozaev"]),
    ("11 end model isoperimetric limits", &["end.flat", "end.pure_log", "end.compact", "end.consistency"]),
    ("12 sign-regime screening over the roster", &["roster.sign_regime"]),
    ("13 Jensen inequality", &["jensen.randomized"]),
];

fn base_id(id: &str) -> &str {
    id.split('[').next().unwrap_or(id)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = SuiteConfig::default().with_env_overrides();
    let reports = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            println!("suite failed to run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut all_ok = true;
    for (name, ids) in CRITERIA {
        let hits: Vec<&CheckReport> = reports.iter().filter(|r| ids.contains(&base_id(&r.id))).collect();
        let failed: Vec<&CheckReport> = hits.iter().copied().filter(|r| !r.pass && !r.informational).collect();
        let ok = !hits.is_empty() && failed.is_empty();
        all_ok &= ok;
        println!("criterion {name:<48} {}  ({} checks)", if ok { "PASS" } else { "FAIL" }, hits.len());
        for r in failed {
            println!("    failed {}: measured {:e}, expected {}, tol {:e}; {}", r.id, r.measured, r.expected.render(), r.tol, r.detail);
        }
    }
    let dir = std::env::var_os(qcurv_core::harness::OUT_DIR_ENV)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance"));
    for fmt in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Text] {
        if let Err(e) = emit_report(&reports, fmt, &dir) {
            println!("could not write {:?} report: {e}", fmt);
        }
    }
    println!("{}", qcurv_core::harness::report::render_text(&reports));
    println!("reports in {}; {} checks in {:.1?}", dir.display(), reports.len(), start.elapsed());
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
