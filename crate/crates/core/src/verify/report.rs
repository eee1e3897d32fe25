use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

use super::suite::IdentityReport;

pub fn to_json(report: &IdentityReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &IdentityReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(report)?)?;
    Ok(())
}

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"))
}

/// Human-readable per-identity table.
pub fn summary_table(report: &IdentityReport) -> String {
    let s = &report.summary;
    let sc = &report.scenario;
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (m={}, n={}, k={}), {} points, seed {}", sc.name, sc.m, sc.n, sc.k, s.points, report.seed);
    let _ = writeln!(out, "{:<5} {:>11} {:>9} {:>5} {:>5} {:>5} {:>5}  description", "id", "max resid", "tol", "pass", "fail", "vac", "info");
    for i in &s.identities {
        let _ = writeln!(
            out,
            "{:<5} {:>11} {:>9.1e} {:>5} {:>5} {:>5} {:>5}  {}",
            i.id.label(),
            fmt_residual(i.max_residual),
            i.tolerance,
            i.passed,
            i.failed,
            i.vacuous,
            i.informational,
            i.description
        );
    }
    for r in report.records.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(out, "point {}: {}", r.index, r.error.as_deref().unwrap_or_default());
    }
    let _ = writeln!(out, "{}", if s.all_pass { "ALL PASS" } else { "FAILURES PRESENT" });
    out
}
