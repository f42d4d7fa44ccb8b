//! Verification suite: a registry of checks over the library, a TOML configuration,
//! a parallel runner and report emitters.

pub mod config;
pub mod oracles;
pub mod registry;
pub mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{default_roster, default_tolerances, SuiteConfig, OUT_DIR_ENV};
pub use registry::{check_ids, registry, Check, Context, Outcome};
pub use report::{determinism_digest, emit_report, suite_passed, CheckReport, Expected, ReportFormat};

use crate::error::{Error, Result};

/// Runs every selected check; reports follow registry order.
///
/// An empty roster yields an empty report. A check that errors or panics produces one
/// failing report carrying the diagnostic, and the remaining checks still run.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    cfg.validate(&check_ids())?;
    if cfg.roster.is_empty() {
        return Ok(Vec::new());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.parallelism > 0 {
        builder = builder.num_threads(cfg.parallelism);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let selected: Vec<&Check> =
        registry().iter().filter(|c| cfg.only.is_empty() || cfg.only.iter().any(|id| id == c.id)).collect();
    pool.install(|| {
        let ctx = Context::new(cfg.clone());
        let nested: Vec<Vec<CheckReport>> = selected.par_iter().map(|c| run_check(&ctx, c)).collect();
        Ok(nested.into_iter().flatten().collect())
    })
}

fn run_check(ctx: &Context, check: &Check) -> Vec<CheckReport> {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| (check.run)(ctx)));
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let failure = |detail: String| {
        vec![CheckReport {
            id: check.id.to_string(),
            anchor: check.anchor.to_string(),
            expected: Expected::Point { value: f64::NAN },
            measured: f64::NAN,
            tol: f64::NAN,
            pass: false,
            runtime_ms,
            informational: false,
            tolerance_overridden: false,
            detail,
        }]
    };
    match result {
        Ok(Ok(outcomes)) => outcomes
            .into_iter()
            .map(|o| {
                let tol = o.tol.unwrap_or_else(|| o.family.map_or(0.0, |f| ctx.tolerance(f)));
                CheckReport {
                    id: match &o.suffix {
                        Some(s) => format!("{}[{s}]", check.id),
                        None => check.id.to_string(),
                    },
                    anchor: check.anchor.to_string(),
                    expected: o.expected,
                    measured: o.measured,
                    tol,
                    pass: CheckReport::decide(o.expected, o.measured, tol, o.converged),
                    runtime_ms,
                    informational: o.informational,
                    tolerance_overridden: o.family.is_some_and(|f| ctx.cfg.tolerance_overridden(f)),
                    detail: o.detail,
                }
            })
            .collect(),
        Ok(Err(e)) => failure(format!("error: {e}")),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            failure(format!("panic: {msg}"))
        }
    }
}

/// Markdown table of the registry: id and the identity it checks.
pub fn registry_table() -> String {
    let mut out = String::from("| check | identity |\n|---|---|\n");
    for c in registry() {
        out.push_str(&format!("| `{}` | `{}` |\n", c.id, c.anchor));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boom(_: &Context) -> Result<Vec<Outcome>> {
        panic!("deliberate failure")
    }

    fn error(_: &Context) -> Result<Vec<Outcome>> {
        Err(Error::Config("bad input".into()))
    }

    #[test]
    fn panics_and_errors_become_failed_reports() {
        let ctx = Context::new(SuiteConfig { roster: Vec::new(), ..Default::default() });
        let r = run_check(&ctx, &Check { id: "test.boom", anchor: "-", run: boom });
        assert_eq!(r.len(), 1);
        assert!(!r[0].pass && !r[0].informational);
        assert!(r[0].detail.contains("deliberate failure"));
        let r = run_check(&ctx, &Check { id: "test.error", anchor: "-", run: error });
        assert!(!r[0].pass && r[0].detail.contains("bad input"));
        assert!(!suite_passed(&r));
    }
}
