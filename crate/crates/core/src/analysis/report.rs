//! Verification reports.

use std::time::Instant;

use serde::Serialize;

use crate::driver::Driver;
use crate::error::Result;
use crate::io::spec::fingerprint;

/// One named check. It passes iff `metric ≤ tolerance`; a NaN metric fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check: String,
    /// The statement being checked.
    pub anchor: String,
    pub pass: bool,
    pub metric: f64,
    pub tolerance: f64,
    /// Wall-clock seconds.
    pub runtime: f64,
}

impl CheckEntry {
    pub fn new(check: &str, anchor: &str, metric: f64, tolerance: f64, runtime: f64) -> Self {
        CheckEntry {
            check: check.to_string(),
            anchor: anchor.to_string(),
            pass: metric <= tolerance,
            metric,
            tolerance,
            runtime,
        }
    }

    /// Times `f` and records its metric. An error is recorded as a failing
    /// entry with a NaN metric.
    pub fn timed(check: &str, anchor: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Self {
        let start = Instant::now();
        let metric = f().unwrap_or(f64::NAN);
        Self::new(check, anchor, metric, tolerance, start.elapsed().as_secs_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuntimeInfo {
    pub threads: usize,
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    pub driver_kind: String,
    /// SHA-256 of the canonical driver specification.
    pub driver_fingerprint: String,
    pub config: serde_json::Value,
    pub runtime: RuntimeInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    /// Assembles a report; entries are ordered by check name.
    pub fn new(d: &Driver, config: serde_json::Value, mut entries: Vec<CheckEntry>, elapsed: f64) -> Self {
        entries.sort_by(|a, b| a.check.cmp(&b.check));
        VerificationReport {
            meta: ReportMeta {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                driver_kind: d.kind().to_string(),
                driver_fingerprint: fingerprint(d),
                config,
                runtime: RuntimeInfo {
                    threads: current_threads(),
                    elapsed,
                },
            },
            entries,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, check: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.check == check)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Worker threads available to parallel sections.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
