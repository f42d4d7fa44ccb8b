//! Check reports and their CSV, JSON and text renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Expected outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    Point { value: f64 },
    Interval { lo: f64, hi: f64 },
    /// The estimator is expected to report non-convergence.
    Divergent,
}

fn short(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        plain
    } else {
        format!("{v:.9e}")
    }
}

impl Expected {
    pub fn render(&self) -> String {
        match self {
            Expected::Point { value } => short(*value),
            Expected::Interval { lo, hi } => format!("[{}, {}]", short(*lo), short(*hi)),
            Expected::Divergent => "divergent".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    /// The identity or bound being checked.
    pub anchor: String,
    pub expected: Expected,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    /// Informational reports never affect the exit status.
    pub informational: bool,
    pub tolerance_overridden: bool,
    pub detail: String,
}

impl CheckReport {
    /// `pass ⇔ |measured - expected| <= tol` (point) or `measured ∈ [lo - tol, hi + tol]`.
    /// For divergent expectations `converged` decides.
    pub fn decide(expected: Expected, measured: f64, tol: f64, converged: bool) -> bool {
        match expected {
            Expected::Point { value } => (measured - value).abs() <= tol,
            Expected::Interval { lo, hi } => measured >= lo - tol && measured <= hi + tol,
            Expected::Divergent => !converged,
        }
    }
}

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Text,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Text => "txt",
        }
    }
}

const CSV_HEADER: [&str; 7] = ["id", "anchor", "expected", "measured", "tol", "pass", "runtime_ms"];

fn csv_rows(reports: &[CheckReport], with_runtime: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if with_runtime {
        w.write_record(CSV_HEADER)?;
    } else {
        w.write_record(&CSV_HEADER[..6])?;
    }
    for r in reports {
        let mut rec = vec![
            r.id.clone(),
            r.anchor.clone(),
            r.expected.render(),
            format!("{:e}", r.measured),
            format!("{:e}", r.tol),
            r.pass.to_string(),
        ];
        if with_runtime {
            rec.push(format!("{:.3}", r.runtime_ms));
        }
        w.write_record(&rec)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn render_csv(reports: &[CheckReport]) -> Result<String> {
    Ok(String::from_utf8_lossy(&csv_rows(reports, true)?).into_owned())
}

pub fn render_json(reports: &[CheckReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

/// Aligned table; failing rows come last.
pub fn render_text(reports: &[CheckReport]) -> String {
    let mut rows: Vec<&CheckReport> = reports.iter().filter(|r| r.pass).collect();
    rows.extend(reports.iter().filter(|r| !r.pass));
    let width = rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    let mut out = String::new();
    let _ = writeln!(out, "{:<6} {:<width$} {:>24} {:>14} {:>10} {:>10}", "status", "id", "expected", "measured", "tol", "ms");
    for r in rows {
        let status = match (r.pass, r.informational) {
            (true, false) => "PASS",
            (true, true) => "INFO",
            (false, false) => "FAIL",
            (false, true) => "info",
        };
        let _ = writeln!(
            out,
            "{:<6} {:<width$} {:>24} {:>14.6e} {:>10.1e} {:>10.1}{}",
            status,
            r.id,
            r.expected.render(),
            r.measured,
            r.tol,
            r.runtime_ms,
            if r.tolerance_overridden { "  (tolerance overridden)" } else { "" }
        );
    }
    out
}

/// Writes `report.<ext>` into `dir` and returns its path.
pub fn emit_report(reports: &[CheckReport], format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("report.{}", format.extension()));
    let body = match format {
        ReportFormat::Csv => render_csv(reports)?,
        ReportFormat::Json => render_json(reports)?,
        ReportFormat::Text => render_text(reports),
    };
    std::fs::write(&path, body)?;
    Ok(path)
}

/// SHA-256 of the CSV without the runtime column.
pub fn determinism_digest(reports: &[CheckReport]) -> Result<String> {
    let bytes = csv_rows(reports, false)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

/// True iff every non-informational report passes.
pub fn suite_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass || r.informational)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str, pass: bool) -> CheckReport {
        CheckReport {
            id: id.into(),
            anchor: "a".into(),
            expected: Expected::Point { value: 1.0 },
            measured: 1.0,
            tol: 0.1,
            pass,
            runtime_ms: 3.0,
            informational: false,
            tolerance_overridden: false,
            detail: String::new(),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(render_csv(&[]).unwrap(), "id,anchor,expected,measured,tol,pass,runtime_ms\n");
    }

    #[test]
    fn json_single_report() {
        let v: serde_json::Value = serde_json::from_str(&render_json(&[report("x", true)]).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 1);
        assert_eq!(v[0]["pass"], true);
    }

    #[test]
    fn text_lists_failures_last() {
        let t = render_text(&[report("bad", false), report("good", true)]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[1].starts_with("PASS"));
        assert!(lines[2].starts_with("FAIL"));
    }

    #[test]
    fn digest_ignores_runtime() {
        let a = report("x", true);
        let mut b = a.clone();
        b.runtime_ms = 999.0;
        assert_eq!(determinism_digest(&[a]).unwrap(), determinism_digest(&[b]).unwrap());
    }

    #[test]
    fn decide_semantics() {
        assert!(CheckReport::decide(Expected::Interval { lo: 0.0, hi: 2.0 }, 2.01, 0.02, true));
        assert!(!CheckReport::decide(Expected::Point { value: 0.0 }, 0.2, 0.1, true));
        assert!(CheckReport::decide(Expected::Divergent, f64::NAN, 0.0, false));
        assert!(!CheckReport::decide(Expected::Divergent, 1.0, 0.0, true));
    }
}
