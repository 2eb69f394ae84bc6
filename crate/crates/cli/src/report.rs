//! Verification report: per-check results with deterministic ordering,
//! JSON serialization, and an ANSI table for the terminal.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "reason")]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

/// One executed check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The mathematical statement being measured.
    pub claim: String,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub overall: String,
    pub failed: Vec<String>,
    pub skipped: Vec<String>,
}

impl VerificationReport {
    pub fn new(mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name.clone())
            .collect();
        let skipped: Vec<String> = checks
            .iter()
            .filter(|c| matches!(c.status, Status::Skipped(_)))
            .map(|c| c.name.clone())
            .collect();
        let overall = if failed.is_empty() { "pass" } else { "fail" };
        Self {
            checks,
            overall: overall.to_string(),
            failed,
            skipped,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == "pass"
    }

    /// Human-readable table; colors unless PONCELET_NO_COLOR is set.
    pub fn render_table(&self) -> String {
        let color = std::env::var_os("PONCELET_NO_COLOR").is_none();
        let paint = |code: &str, text: &str| {
            if color {
                format!("\x1b[{code}m{text}\x1b[0m")
            } else {
                text.to_string()
            }
        };
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(10)
            .max(10);
        let mut out = String::new();
        for c in &self.checks {
            let (tag, code) = match &c.status {
                Status::Pass => ("PASS", "32"),
                Status::Fail => ("FAIL", "31"),
                Status::Skipped(_) => ("SKIP", "33"),
            };
            let measured = match c.measured {
                Some(v) => format!("{v:>12.3e}"),
                None => format!("{:>12}", "-"),
            };
            out.push_str(&format!(
                "{} {:width$}  measured {}  tol {:9.1e}  {}\n",
                paint(code, tag),
                c.name,
                measured,
                c.tolerance,
                match &c.status {
                    Status::Skipped(reason) => format!("skipped ({reason})"),
                    _ => c.claim.clone(),
                },
            ));
        }
        let overall = if self.passed() {
            paint("32", "all checks passed")
        } else {
            paint("31", &format!("FAILED: {}", self.failed.join(", ")))
        };
        out.push_str(&overall);
        out.push('\n');
        out
    }
}
