//! Pass/fail results with machine-readable witnesses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One named check. A failed check carries a witness describing the first
/// offending index and both sides of the failed identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Ordered list of checks; accepted iff every check passed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&mut self, name: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: true,
            witness: None,
        });
    }

    pub fn fail(&mut self, name: &str, witness: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: false,
            witness: Some(witness),
        });
    }

    /// Records `name` as passed when `failure` is `None`.
    pub fn record(&mut self, name: &str, failure: Option<String>) {
        match failure {
            None => self.pass(name),
            Some(w) => self.fail(name, w),
        }
    }

    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn extend(&mut self, prefix: &str, other: Verdict) {
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.name = alloc::format!("{prefix}.{}", c.name);
            }
            self.checks.push(c);
        }
    }
}
