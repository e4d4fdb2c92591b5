//! Verification reports: one entry per audit, each naming the inequality it checks.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::exit;

/// The measured side of one audit.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    pub params: Value,
    pub fitted_constants: BTreeMap<String, f64>,
    pub worst_slack: Option<f64>,
    pub details: Value,
}

impl Outcome {
    pub fn new(pass: bool) -> Self {
        Self {
            pass,
            params: Value::Null,
            details: Value::Null,
            ..Self::default()
        }
    }

    pub fn params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.fitted_constants.insert(name.to_string(), value);
        self
    }

    pub fn slack(mut self, slack: f64) -> Self {
        self.worst_slack = Some(slack);
        self
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

/// Why an audit produced no outcome.
#[derive(Debug, Clone)]
pub struct AuditFailure {
    pub message: String,
    /// The time integration stopped early (CFL).
    pub runtime_abort: bool,
}

impl AuditFailure {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            runtime_abort: false,
        }
    }

    pub fn abort(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            runtime_abort: true,
        }
    }
}

impl From<besov_core::Error> for AuditFailure {
    fn from(e: besov_core::Error) -> Self {
        Self::new(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub name: String,
    /// The inequality or identity under test.
    pub anchor: String,
    pub pass: bool,
    pub params: Value,
    pub fitted_constants: BTreeMap<String, f64>,
    pub worst_slack: Option<f64>,
    pub runtime_s: f64,
    pub error: Option<String>,
    pub details: Value,
    #[serde(skip)]
    pub runtime_abort: bool,
}

impl AuditEntry {
    /// Runs `audit`, timing it and turning an error into a failing entry.
    pub fn run(
        name: &str,
        anchor: &str,
        audit: impl FnOnce() -> Result<Outcome, AuditFailure>,
    ) -> Self {
        let start = Instant::now();
        let result = audit();
        let runtime_s = start.elapsed().as_secs_f64();
        match result {
            Ok(o) => Self {
                name: name.to_string(),
                anchor: anchor.to_string(),
                pass: o.pass,
                params: o.params,
                fitted_constants: o.fitted_constants,
                worst_slack: o.worst_slack,
                runtime_s,
                error: None,
                details: o.details,
                runtime_abort: false,
            },
            Err(f) => Self {
                name: name.to_string(),
                anchor: anchor.to_string(),
                pass: false,
                params: Value::Null,
                fitted_constants: BTreeMap::new(),
                worst_slack: None,
                runtime_s,
                error: Some(f.message),
                details: Value::Null,
                runtime_abort: f.runtime_abort,
            },
        }
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let tail = match (&self.error, self.worst_slack) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(s)) => format!("worst slack {s:.3e}"),
            (None, None) => String::new(),
        };
        format!("{verdict} {} [{}] {tail} ({:.2} s)", self.name, self.anchor, self.runtime_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config_sha256: Option<String>,
    pub seed: u64,
    pub pass: bool,
    pub summary: Summary,
    pub audits: Vec<AuditEntry>,
}

impl VerificationReport {
    pub fn new(suite: &str, config_sha256: Option<String>, seed: u64, audits: Vec<AuditEntry>) -> Self {
        let errored = audits.iter().filter(|a| a.error.is_some()).count();
        let passed = audits.iter().filter(|a| a.pass).count();
        Self {
            suite: suite.to_string(),
            config_sha256,
            seed,
            pass: passed == audits.len(),
            summary: Summary {
                total: audits.len(),
                passed,
                failed: audits.len() - passed,
                errored,
            },
            audits,
        }
    }

    /// `0` when every audit passes, `3` when a run aborted, `1` otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            exit::PASS
        } else if self.audits.iter().any(|a| a.runtime_abort) {
            exit::RUNTIME
        } else {
            exit::AUDIT_FAIL
        }
    }
}
