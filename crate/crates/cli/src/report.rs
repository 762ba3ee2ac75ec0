//! Run reports and their JSON and text renderings.

use std::io::Write;
use std::time::Duration;

use serde::Serialize;

use crate::config::{CheckKind, Expect, SuiteConfig};

pub const TOOL: &str = "conncurv";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped on any incompatible change to the JSON layout.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

impl Serialize for CheckKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl Serialize for Expect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Expect::Hold => "hold",
            Expect::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub expect: Expect,
    pub samples: usize,
    /// `None` when the check errored before producing a residual.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config_digest: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub duration_seconds: f64,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    /// Sorts the checks by name; the global verdict is their conjunction.
    pub fn new(config: &SuiteConfig, mut checks: Vec<CheckResult>, duration: Duration) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let verdict = if checks.iter().all(|c| c.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        RunReport {
            schema: REPORT_SCHEMA,
            tool: TOOL,
            version: VERSION,
            config_digest: config.digest.clone(),
            seed: config.seed,
            verdict,
            duration_seconds: duration.as_secs_f64(),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<&CheckResult> = self.checks.iter().collect();
        // stable sort keeps name order within each group
        rows.sort_by_key(|c| c.verdict == Verdict::Pass);
        let width = rows.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let kind_width = rows.iter().map(|c| c.kind.as_str().len()).max().unwrap_or(4).max(4);
        let mut out = format!(
            "{:<6} {:<width$} {:<kind_width$} {:>8} {:>12} {:>10}\n",
            "STATUS", "CHECK", "KIND", "SAMPLES", "RESIDUAL", "TOLERANCE"
        );
        for c in rows {
            let status = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            };
            let residual = c.max_residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
            let marker = if c.expect == Expect::Violated { " (expect violated)" } else { "" };
            out += &format!(
                "{status:<6} {:<width$} {:<kind_width$} {:>8} {residual:>12} {:>10.1e}{marker}\n",
                c.name,
                c.kind.as_str(),
                c.samples,
                c.tolerance
            );
            if let Some(e) = &c.error {
                out += &format!("       error: {e}\n");
            }
            if let Some(d) = &c.detail {
                out += &format!("       {d}\n");
            }
        }
        let failed = self.checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
        out += &format!(
            "\n{}: {} checks, {} failed, {:.2}s (seed {}, config {})\n",
            self.verdict.as_str().to_uppercase(),
            self.checks.len(),
            failed,
            self.duration_seconds,
            self.seed,
            &self.config_digest[..self.config_digest.len().min(12)]
        );
        out
    }

    pub fn emit(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        let text = match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        };
        out.write_all(text.as_bytes())?;
        out.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> SuiteConfig {
        SuiteConfig {
            version: 1,
            seed: 0,
            digest: "ab".repeat(32),
            checks: vec![],
        }
    }

    fn result(name: &str, verdict: Verdict) -> CheckResult {
        CheckResult {
            name: name.into(),
            kind: CheckKind::Linearity,
            expect: Expect::Hold,
            samples: 3,
            max_residual: Some(0.0),
            tolerance: 1e-9,
            verdict,
            detail: None,
            error: None,
        }
    }

    #[test]
    fn empty_report_passes() {
        let r = RunReport::new(&config(), vec![], Duration::ZERO);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.to_json().contains("\"verdict\": \"pass\""));
    }

    #[test]
    fn text_lists_failures_first() {
        let checks = vec![result("a", Verdict::Pass), result("z", Verdict::Fail), result("b", Verdict::Pass)];
        let r = RunReport::new(&config(), checks, Duration::ZERO);
        assert_eq!(r.verdict, Verdict::Fail);
        let text = r.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("FAIL") && lines[1].contains(" z "));
        assert!(lines[2].contains(" a ") && lines[3].contains(" b "));
    }
}
