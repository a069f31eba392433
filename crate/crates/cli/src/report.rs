//! The versioned JSON report and the stdout summary.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::checks::CheckResult;

pub const SCHEMA: &str = "gray-holonomy/1";

/// Contains no timings, so identical inputs give identical bytes.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub lifting_factor: f64,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), |v| format!("{v:.3e}"))
}

impl Report {
    pub fn new(command: &str, seed: u64, lifting_factor: f64, checks: Vec<CheckResult>) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            seed,
            lifting_factor,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:<6} {:>12} {:>3} {:>10}",
            "check", "result", "value", "", "bound"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<16} {:<6} {:>12} {:>3} {:>10}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                sci(c.residual),
                c.comparison,
                format!("{:.1e}", c.tolerance),
            );
            if c.name == "convergence" {
                if let Some(study) = c.details.get("study") {
                    let ns = study["n"].as_array().cloned().unwrap_or_default();
                    let es = study["errors"].as_array().cloned().unwrap_or_default();
                    let _ = writeln!(s, "{:>8}  {:>12}", "N", "error");
                    for (n, e) in ns.iter().zip(&es) {
                        let _ = writeln!(s, "{:>8}  {:>12}", n.to_string(), sci(e.as_f64()));
                    }
                }
            }
        }
        s
    }

    /// One line per failed check, naming the identity and sample for
    /// axiom suites.
    pub fn failure_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.checks.iter().filter(|c| !c.pass) {
            match c.details.get("failures").and_then(|f| f.as_array()) {
                Some(fs) if !fs.is_empty() => {
                    for f in fs {
                        out.push(format!(
                            "FAIL {}: identity {} residual {} at sample {}",
                            c.name,
                            f["identity"].as_str().unwrap_or("?"),
                            sci(f["max_residual"].as_f64()),
                            f["worst_seed_index"],
                        ));
                    }
                }
                _ => out.push(format!(
                    "FAIL {}: {} not {} {:.1e}",
                    c.name,
                    sci(c.residual),
                    c.comparison,
                    c.tolerance
                )),
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}
