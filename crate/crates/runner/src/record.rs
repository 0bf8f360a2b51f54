//! Results of one scenario run and the pass rule applied to them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

/// How a check's value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    /// `value >= bound - tolerance`
    AtLeast,
    /// `value <= bound + tolerance`
    AtMost,
    /// `|value - bound| <= tolerance`
    Within,
    /// `|value / bound - 1| <= tolerance`
    RatioWithin,
}

impl Cmp {
    /// Distance to failing; nonnegative exactly when the check holds.
    pub fn slack(self, value: f64, bound: f64, tolerance: f64) -> f64 {
        let s = match self {
            Cmp::AtLeast => value - (bound - tolerance),
            Cmp::AtMost => bound + tolerance - value,
            Cmp::Within => tolerance - (value - bound).abs(),
            Cmp::RatioWithin => tolerance - (value / bound - 1.0).abs(),
        };
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::AtLeast => ">=",
            Cmp::AtMost => "<=",
            Cmp::Within => "~",
            Cmp::RatioWithin => "~x",
        }
    }
}

/// One measured quantity against its predicted bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub cmp: Cmp,
    pub tolerance: f64,
    pub slack: f64,
    pub pass: bool,
    /// Parameters and side quantities (`t`, sample index, stderr, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl Check {
    pub fn new(label: impl Into<String>, value: f64, bound: f64, cmp: Cmp, tolerance: f64) -> Self {
        let slack = cmp.slack(value, bound, tolerance);
        Self {
            label: label.into(),
            value,
            bound,
            cmp,
            tolerance,
            slack,
            pass: slack >= 0.0,
            extra: BTreeMap::new(),
            verdict: None,
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.to_string(), v);
        self
    }

    pub fn with_verdict(mut self, v: impl Into<String>) -> Self {
        self.verdict = Some(v.into());
        self
    }
}

/// Checks sharing a rule. `required` is the fraction that must pass;
/// `None` marks a descriptive group that does not enter the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub claim: String,
    pub required: Option<f64>,
    pub checks: Vec<Check>,
}

impl Group {
    pub fn new(name: &str, claim: impl Into<String>, required: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            claim: claim.into(),
            required,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.checks.is_empty() {
            0.0
        } else {
            self.passed() as f64 / self.checks.len() as f64
        }
    }

    /// Slack of the check that decides the rule: with `k = ceil(f N)`
    /// checks required, the `k`-th largest slack. Nonnegative exactly when
    /// the group passes.
    pub fn margin(&self) -> Option<f64> {
        let f = self.required?;
        if self.checks.is_empty() {
            return Some(f64::NEG_INFINITY);
        }
        let mut s: Vec<f64> = self.checks.iter().map(|c| c.slack).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let k = ((f * s.len() as f64 - 1e-9).ceil() as usize).clamp(1, s.len());
        Some(s[k - 1])
    }

    pub fn holds(&self) -> bool {
        self.margin().is_none_or(|m| m >= 0.0)
    }

    pub fn mean_value(&self) -> f64 {
        mean(self.checks.iter().map(|c| c.value))
    }

    pub fn mean_bound(&self) -> f64 {
        mean(self.checks.iter().map(|c| c.bound))
    }

    /// Labels of failing checks, for the exceptional-parameter notes.
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect()
    }

    pub fn rule_text(&self) -> String {
        match self.required {
            None => "descriptive".into(),
            Some(f) if f >= 1.0 => "every check".into(),
            Some(f) => format!("at least {:.0}% of checks", 100.0 * f),
        }
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub scenario: String,
    pub config_hash: String,
    pub config: ScenarioConfig,
    pub groups: Vec<Group>,
    /// Mean predicted bound of the first ruled group.
    pub theorem_bound: f64,
    /// Mean measured value of the first ruled group.
    pub measured: f64,
    /// Smallest group margin; nonnegative exactly when `pass`.
    pub margin: f64,
    pub pass: bool,
    pub rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

impl ExperimentRecord {
    pub fn new(config: &ScenarioConfig, groups: Vec<Group>, notes: Vec<String>, runtime_seconds: f64) -> Self {
        let mut r = Self {
            scenario: config.scenario.clone(),
            config_hash: config.hash(),
            config: config.clone(),
            groups,
            theorem_bound: f64::NAN,
            measured: f64::NAN,
            margin: f64::NAN,
            pass: false,
            rule: String::new(),
            notes,
            runtime_seconds,
        };
        r.evaluate();
        r
    }

    /// Recompute every derived field from the checks.
    pub fn evaluate(&mut self) {
        for g in &mut self.groups {
            for c in &mut g.checks {
                c.slack = c.cmp.slack(c.value, c.bound, c.tolerance);
                c.pass = c.slack >= 0.0;
            }
        }
        let ruled: Vec<&Group> = self.groups.iter().filter(|g| g.required.is_some()).collect();
        let head = ruled.first().copied().or(self.groups.first());
        self.theorem_bound = head.map_or(f64::NAN, Group::mean_bound);
        self.measured = head.map_or(f64::NAN, Group::mean_value);
        self.margin = ruled
            .iter()
            .filter_map(|g| g.margin())
            .fold(f64::INFINITY, f64::min);
        self.pass = !ruled.is_empty() && ruled.iter().all(|g| g.holds());
        self.rule = ruled
            .iter()
            .map(|g| {
                let cmp = g.checks.first().map_or("", |c| c.cmp.symbol());
                format!("{}: {} ({cmp})", g.name, g.rule_text())
            })
            .collect::<Vec<_>>()
            .join("; ");
    }

    /// Whether the stored verdict agrees with the one the checks imply.
    pub fn is_consistent(&self) -> bool {
        let mut again = self.clone();
        again.evaluate();
        again.pass == self.pass
            && again.groups.iter().zip(&self.groups).all(|(a, b)| {
                a.checks.iter().zip(&b.checks).all(|(x, y)| x.pass == y.pass)
            })
    }

    /// Every number that two runs of the same config must reproduce.
    pub fn aggregates(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("theorem_bound".to_string(), self.theorem_bound),
            ("measured".to_string(), self.measured),
            ("margin".to_string(), self.margin),
        ];
        for g in &self.groups {
            for c in &g.checks {
                let key = format!("{}/{}", g.name, c.label);
                out.push((format!("{key}/value"), c.value));
                out.push((format!("{key}/bound"), c.bound));
                for (k, v) in &c.extra {
                    out.push((format!("{key}/{k}"), *v));
                }
            }
        }
        out
    }

    /// First aggregate differing by more than `tol` (relative to the larger
    /// magnitude, absolute below 1), or a structural difference.
    pub fn compare(&self, other: &ExperimentRecord, tol: f64) -> Option<String> {
        if self.config_hash != other.config_hash {
            return Some(format!("config hash {} vs {}", self.config_hash, other.config_hash));
        }
        let a = self.aggregates();
        let b = other.aggregates();
        if a.len() != b.len() {
            return Some(format!("{} aggregates vs {}", a.len(), b.len()));
        }
        for ((ka, va), (kb, vb)) in a.iter().zip(&b) {
            if ka != kb {
                return Some(format!("aggregate {ka} vs {kb}"));
            }
            let same = (va.is_nan() && vb.is_nan())
                || va == vb
                || (va - vb).abs() <= tol * va.abs().max(vb.abs()).max(1.0);
            if !same {
                return Some(format!("{ka}: {va:e} vs {vb:e}"));
            }
        }
        if self.pass != other.pass {
            return Some("pass differs".into());
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(required: Option<f64>, values: &[f64]) -> Group {
        let mut g = Group::new("g", "value >= 1", required);
        for (i, &v) in values.iter().enumerate() {
            g.push(Check::new(format!("c{i}"), v, 1.0, Cmp::AtLeast, 0.0));
        }
        g
    }

    #[test]
    fn slack_signs() {
        assert_eq!(Cmp::AtLeast.slack(1.0, 1.2, 0.2), 0.0);
        assert!(Cmp::AtMost.slack(1.3, 1.2, 0.05) < 0.0);
        assert!(Cmp::Within.slack(1.25, 1.2, 0.1) > 0.0);
        assert!(Cmp::RatioWithin.slack(1.0, 0.0, 0.1) < 0.0);
        assert_eq!(Cmp::Within.slack(f64::NAN, 1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn fraction_margin() {
        // 9 of 10 pass, 90% required
        let g = group(Some(0.9), &[2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 1.5, 0.5]);
        assert_eq!(g.margin(), Some(0.5));
        assert!(g.holds());
        let g = group(Some(1.0), &[2.0, 0.5]);
        assert_eq!(g.margin(), Some(-0.5));
        assert!(!g.holds());
        assert!(group(None, &[0.0]).holds());
    }

    #[test]
    fn record_verdict_is_recomputed() {
        let c = ScenarioConfig::new("parseval");
        let mut r = ExperimentRecord::new(&c, vec![group(Some(1.0), &[1.5, 2.0]), group(None, &[0.0])], vec![], 0.0);
        assert!(r.pass);
        assert_eq!(r.measured, 1.75);
        assert!(r.is_consistent());
        r.pass = false;
        assert!(!r.is_consistent());
        r.groups[0].checks[0].value = 0.0;
        r.evaluate();
        assert!(!r.pass && r.margin == -1.0);
    }

    #[test]
    fn descriptive_only_is_not_a_pass() {
        let c = ScenarioConfig::new("parseval");
        assert!(!ExperimentRecord::new(&c, vec![group(None, &[2.0])], vec![], 0.0).pass);
    }

    #[test]
    fn compare_tolerates_reduction_noise() {
        let c = ScenarioConfig::new("parseval");
        let a = ExperimentRecord::new(&c, vec![group(Some(1.0), &[1.5])], vec![], 0.0);
        let mut b = a.clone();
        b.runtime_seconds = 9.0;
        b.groups[0].checks[0].value = 1.5 * (1.0 + 1e-14);
        b.evaluate();
        assert_eq!(a.compare(&b, 1e-12), None);
        b.groups[0].checks[0].value = 1.5001;
        b.evaluate();
        assert!(a.compare(&b, 1e-12).is_some());
    }
}
