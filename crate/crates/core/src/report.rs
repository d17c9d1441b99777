//! Check records and deterministic report emission: a machine-readable JSON
//! document with stable ordering plus a mirrored human-readable text form.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs_hash: String,
    pub defect: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, inputs_hash: &str, defect: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            inputs_hash: inputs_hash.to_string(),
            defect,
            threshold,
            pass: defect <= threshold,
            detail: None,
        }
    }

    pub fn flag(name: impl Into<String>, inputs_hash: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            inputs_hash: inputs_hash.to_string(),
            defect: if ok { 0.0 } else { 1.0 },
            threshold: 0.5,
            pass: ok,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub seed: u64,
    pub suite: String,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    pub fn new(config_hash: &str, seed: u64, suite: &str) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed,
            suite: suite.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Concatenate the sections of several reports in declared order.
    pub fn merged(reports: &[RunReport]) -> RunReport {
        let mut out = RunReport::new(
            &reports
                .iter()
                .map(|r| r.config_hash.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            reports.first().map(|r| r.seed).unwrap_or(0),
            "merged",
        );
        for r in reports {
            for c in &r.checks {
                out.checks.push(c.clone());
            }
        }
        out
    }

    /// Deterministic machine form: field order is fixed by the struct and
    /// check order by insertion.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Text report mirroring the machine document.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {}  config {}  seed {}\n",
            self.suite, self.config_hash, self.seed
        ));
        out.push_str(&format!("checks: {}\n", self.checks.len()));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<44} defect {:>12.3e}  threshold {:>9.1e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.defect,
                c.threshold
            ));
        }
        out.push_str(if self.all_pass() {
            "result: pass\n"
        } else {
            "result: FAIL\n"
        });
        out
    }

    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = std::fs::File::create(dir.join(format!("{stem}.json")))?;
        json.write_all(self.to_json().as_bytes())?;
        let mut text = std::fs::File::create(dir.join(format!("{stem}.txt")))?;
        text.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_and_merge() {
        let mut r1 = RunReport::new("abc", 7, "axioms");
        r1.push(CheckRecord::new("unit", "abc", 1e-12, 1e-9));
        let mut r2 = RunReport::new("abc", 7, "axioms");
        r2.push(CheckRecord::new("unit", "abc", 1e-12, 1e-9));
        assert_eq!(r1.to_json(), r2.to_json());
        let merged = RunReport::merged(&[r1, r2]);
        assert_eq!(merged.checks.len(), 2);
        assert!(merged.all_pass());
    }

    #[test]
    fn empty_suite_has_header_only() {
        let r = RunReport::new("xyz", 1, "none");
        let text = r.to_text();
        assert!(text.contains("checks: 0"));
        assert!(text.contains("result: pass"));
    }
}
