//! Runs the nine acceptance criteria and prints one line per criterion.
//!
//! Checks listed as known failures (see the decision log) are reported as
//! `FAIL (known)` and leave the exit status alone; anything else that fails
//! makes the binary exit with status 1.

use std::process::ExitCode;
use std::time::Instant;

use reductio_core::suite::{Status, CRITERIA};

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-')).unwrap_or_default();
    let mut unexpected = 0;
    for c in CRITERIA.iter().filter(|c| c.matches(&filter)) {
        let start = Instant::now();
        let result = c.run();
        let secs = start.elapsed().as_secs_f64();
        let limit = c.time_limit_secs.map_or_else(|| "no limit".to_string(), |l| format!("limit {l} s"));
        let over = c.time_limit_secs.is_some_and(|l| secs > l as f64);
        let (label, detail) = match &result {
            Err(e) => ("FAIL", format!("error: {e}")),
            Ok(out) => {
                let failing: Vec<String> = out
                    .verdict
                    .checks
                    .iter()
                    .filter(|ch| !ch.passed)
                    .map(|ch| format!("{}: {}", ch.name, ch.witness.clone().unwrap_or_default()))
                    .collect();
                match c.status(&out.verdict) {
                    Status::Pass => ("PASS", format!("{} checks", out.verdict.checks.len())),
                    Status::KnownFail => ("FAIL (known)", failing.join("; ")),
                    Status::Fail => ("FAIL", failing.join("; ")),
                }
            }
        };
        let label = if over && label == "PASS" { "FAIL (slow)" } else { label };
        if label == "FAIL" || label == "FAIL (slow)" {
            unexpected += 1;
        }
        println!("criterion {} [{}] {label} in {secs:.2} s ({limit}): {} | {detail}", c.id, c.key, c.title);
        if let Ok(out) = &result {
            for n in &out.notes {
                println!("    {n}");
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
