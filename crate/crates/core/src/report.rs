//! Structured pass/fail reports.
//!
//! Each check records the computed residual (or value), the threshold it was
//! held to, and a one-line statement of the identity or property being
//! checked, so a failing report is readable without the source.

use serde::Serialize;

use crate::tol::TOLERANCE_NOTE;

/// A single checked quantity.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    /// The identity or property the check verifies, in plain notation.
    pub identity: String,
    /// Residual or measured value.
    pub value: f64,
    /// Threshold the value was compared against (interpretation per check).
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A named collection of checks.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub subject: String,
    pub tolerance_note: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    pub checks: Vec<CheckLine>,
}

pub type ValidationReport = Report;
pub type SuiteReport = Report;
pub type BoundReport = Report;

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report {
            subject: subject.into(),
            tolerance_note: TOLERANCE_NOTE,
            convention: None,
            checks: Vec::new(),
        }
    }

    pub fn with_convention(mut self, convention: impl Into<String>) -> Self {
        self.convention = Some(convention.into());
        self
    }

    /// Residual-style check: passes iff `value <= tolerance`.
    pub fn check_residual(
        &mut self,
        name: impl Into<String>,
        identity: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> bool {
        let pass = value.is_finite() && value <= tolerance;
        self.checks.push(CheckLine {
            name: name.into(),
            identity: identity.into(),
            value,
            tolerance,
            pass,
            note: None,
        });
        pass
    }

    /// Lower-bound check: passes iff `value >= tolerance`.
    pub fn check_at_least(
        &mut self,
        name: impl Into<String>,
        identity: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> bool {
        let pass = value.is_finite() && value >= tolerance;
        self.checks.push(CheckLine {
            name: name.into(),
            identity: identity.into(),
            value,
            tolerance,
            pass,
            note: None,
        });
        pass
    }

    /// Record a value with an externally decided verdict.
    pub fn check_bool(
        &mut self,
        name: impl Into<String>,
        identity: impl Into<String>,
        value: f64,
        tolerance: f64,
        pass: bool,
    ) -> bool {
        self.checks.push(CheckLine {
            name: name.into(),
            identity: identity.into(),
            value,
            tolerance,
            pass,
            note: None,
        });
        pass
    }

    /// Informational line that never fails the report.
    pub fn info(&mut self, name: impl Into<String>, identity: impl Into<String>, value: f64) {
        self.checks.push(CheckLine {
            name: name.into(),
            identity: identity.into(),
            value,
            tolerance: f64::INFINITY,
            pass: true,
            note: None,
        });
    }

    pub fn note_last(&mut self, note: impl Into<String>) {
        if let Some(last) = self.checks.last_mut() {
            last.note = Some(note.into());
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One line per check, human readable.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {}\n", self.subject));
        if let Some(c) = &self.convention {
            out.push_str(&format!("   convention: {}\n", c));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "   [{}] {:<42} value={:+.6e} tol={:.3e}  ({})\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.identity
            ));
            if let Some(n) = &c.note {
                out.push_str(&format!("          note: {}\n", n));
            }
        }
        out.push_str(&format!(
            "   overall: {}\n",
            if self.pass() { "pass" } else { "FAIL" }
        ));
        out
    }
}
