//! The JSON report every command emits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use reductio_core::Verdict;

use crate::formats::to_canonical_json;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportCheck {
    pub check: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub verdicts: Vec<ReportCheck>,
    /// Named results such as optimal values; rationals as `p/q` strings.
    pub results: BTreeMap<String, String>,
    /// Only filled with `--timing`, so that reports stay byte-stable.
    pub timing_ms: Option<u64>,
}

/// Accumulates the digest of everything a command reads.
#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn param(&mut self, name: &str, value: impl std::fmt::Display) {
        self.hasher.update(format!("{name}={value}\0").as_bytes());
    }

    pub fn file(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update(format!("file:{}\0", bytes.len()).as_bytes());
        self.hasher.update(&bytes);
        Ok(())
    }

    pub fn digest(self) -> String {
        let bytes = self.hasher.finalize();
        let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}

impl Report {
    pub fn new(command: &str, inputs: Inputs) -> Self {
        Report {
            command: command.to_string(),
            inputs_digest: inputs.digest(),
            verdicts: Vec::new(),
            results: BTreeMap::new(),
            timing_ms: None,
        }
    }

    pub fn add(&mut self, prefix: &str, v: &Verdict) {
        for c in &v.checks {
            self.verdicts.push(ReportCheck {
                check: if prefix.is_empty() { c.name.clone() } else { format!("{prefix}.{}", c.name) },
                passed: c.passed,
                witness: c.witness.clone(),
            });
        }
    }

    pub fn check(&mut self, name: &str, failure: Option<String>) {
        self.verdicts.push(ReportCheck {
            check: name.to_string(),
            passed: failure.is_none(),
            witness: failure,
        });
    }

    pub fn result(&mut self, key: &str, value: impl std::fmt::Display) {
        self.results.insert(key.to_string(), value.to_string());
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|c| c.passed)
    }

    /// Canonical text; a report without verdicts violates the schema.
    pub fn render(&self) -> Result<String, CliError> {
        if self.verdicts.is_empty() {
            return Err(CliError::Internal(format!("report for `{}` has no verdicts", self.command)));
        }
        to_canonical_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut inputs = Inputs::default();
        inputs.param("n", 2);
        let mut r = Report::new("demo", inputs);
        r.check("b", None);
        r.check("a", Some("x = 1/2".into()));
        r.result("value", reductio_core::rational::q(2, 4));
        r
    }

    #[test]
    fn empty_report_is_rejected() {
        let r = Report::new("demo", Inputs::default());
        assert!(matches!(r.render(), Err(CliError::Internal(_))));
    }

    #[test]
    fn keys_sorted_and_rationals_reduced() {
        let text = sample().render().unwrap();
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"command\"") < pos("\"inputsDigest\""));
        assert!(pos("\"inputsDigest\"") < pos("\"results\""));
        assert!(pos("\"results\"") < pos("\"timingMs\""));
        assert!(text.contains("\"value\": \"1/2\""));
        assert!(text.contains("\"timingMs\": null"));
        assert_eq!(text, sample().render().unwrap());
    }

    #[test]
    fn digest_depends_on_inputs() {
        let d = |v: usize| {
            let mut i = Inputs::default();
            i.param("n", v);
            i.digest()
        };
        assert_eq!(d(2), d(2));
        assert_ne!(d(2), d(3));
        assert!(d(2).starts_with("sha256:"));
    }
}
