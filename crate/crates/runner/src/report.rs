//! Summary tables over stored records.

use std::fmt::Write as _;

use serde::Serialize;

use crate::record::ExperimentRecord;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_NO_RECORDS: u8 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub scenario: String,
    pub config_hash: String,
    pub bound: f64,
    pub measured: f64,
    pub margin: f64,
    pub pass: bool,
    /// False when the stored verdict disagrees with the stored checks.
    pub consistent: bool,
    pub rule: String,
    pub failing: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
    pub passed: usize,
    pub total: usize,
}

impl Report {
    /// Verdicts are recomputed from the checks, not taken from the files.
    pub fn new(records: &[ExperimentRecord]) -> Self {
        let rows: Vec<Row> = records
            .iter()
            .map(|r| {
                let mut again = r.clone();
                again.evaluate();
                let failing = again
                    .groups
                    .iter()
                    .filter(|g| g.required.is_some() && !g.holds())
                    .map(|g| format!("{} ({}/{} checks)", g.name, g.passed(), g.checks.len()))
                    .collect();
                Row {
                    scenario: again.scenario.clone(),
                    config_hash: again.config_hash.clone(),
                    bound: again.theorem_bound,
                    measured: again.measured,
                    margin: again.margin,
                    pass: again.pass,
                    consistent: r.is_consistent(),
                    rule: again.rule.clone(),
                    failing,
                    notes: again.notes.clone(),
                }
            })
            .collect();
        let passed = rows.iter().filter(|r| r.pass && r.consistent).count();
        Self { total: rows.len(), passed, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn exit_code(&self) -> u8 {
        if self.is_empty() {
            EXIT_NO_RECORDS
        } else if self.passed == self.total {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn to_text(&self) -> String {
        if self.is_empty() {
            return "no records\n".into();
        }
        let mut s = String::new();
        let w = self.rows.iter().map(|r| r.scenario.len()).max().unwrap_or(8).max(8);
        let _ = writeln!(s, "{:<w$}  {:>8}  {:>10}  {:>10}  {:>10}  result", "scenario", "hash", "bound", "measured", "margin");
        for r in &self.rows {
            let result = match (r.pass, r.consistent) {
                (_, false) => "INCONSISTENT",
                (true, true) => "pass",
                (false, true) => "FAIL",
            };
            let _ = writeln!(
                s,
                "{:<w$}  {:>8}  {:>10.4}  {:>10.4}  {:>10.4}  {result}",
                r.scenario,
                &r.config_hash[..8.min(r.config_hash.len())],
                r.bound,
                r.measured,
                r.margin
            );
        }
        let _ = writeln!(s, "\npassed {}/{}", self.passed, self.total);
        for r in &self.rows {
            let _ = writeln!(s, "\n{} [{}]\n  rule: {}", r.scenario, &r.config_hash[..8.min(r.config_hash.len())], r.rule);
            for f in &r.failing {
                let _ = writeln!(s, "  failing: {f}");
            }
            for n in &r.notes {
                let _ = writeln!(s, "  note: {n}");
            }
        }
        s.push_str(
            "\nExceptional-set estimates are descriptive: they list the bound and the \
             sampled parameters that failed, and never decide pass/fail.\n",
        );
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        if self.is_empty() {
            return serde_json::json!({ "status": "no records", "rows": [], "passed": 0, "total": 0 });
        }
        let mut v = serde_json::to_value(self).unwrap_or_default();
        v["status"] = if self.passed == self.total { "pass" } else { "fail" }.into();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::record::{Check, Cmp, Group};

    fn record(name: &str, value: f64) -> ExperimentRecord {
        let mut g = Group::new("g", "value >= 1", Some(1.0));
        g.push(Check::new("c", value, 1.0, Cmp::AtLeast, 0.0));
        ExperimentRecord::new(&ScenarioConfig::new(name), vec![g], vec![], 0.0)
    }

    #[test]
    fn single_pass() {
        let r = Report::new(&[record("parseval", 2.0)]);
        assert_eq!((r.passed, r.total), (1, 1));
        assert_eq!(r.exit_code(), EXIT_PASS);
        assert!(r.to_text().contains("passed 1/1"));
    }

    #[test]
    fn mixed_fails() {
        let r = Report::new(&[record("parseval", 2.0), record("sharp_pi", 0.5)]);
        assert_eq!(r.exit_code(), EXIT_FAIL);
        assert_eq!(r.to_json()["status"], "fail");
    }

    #[test]
    fn empty_is_its_own_status() {
        let r = Report::new(&[]);
        assert_eq!(r.exit_code(), EXIT_NO_RECORDS);
        assert_eq!(r.to_text(), "no records\n");
        assert_eq!(r.to_json()["status"], "no records");
    }

    #[test]
    fn tampered_verdict_is_flagged() {
        let mut rec = record("parseval", 0.5);
        rec.pass = true;
        let r = Report::new(&[rec]);
        assert!(!r.rows[0].consistent);
        assert_eq!(r.exit_code(), EXIT_FAIL);
    }
}
