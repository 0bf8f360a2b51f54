//! Scenario configuration files and their content hash.

use std::fs;
use std::path::{Path, PathBuf};

use fractal_lab::FractalSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, RunnerError};
use crate::scenarios;

pub const DEFAULT_OUTPUT_DIR: &str = "runs";

fn default_n() -> usize {
    2
}

/// One scenario run. Unset fields take the scenario's pinned defaults
/// (see [`ScenarioConfig::resolved`]); unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<FractalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_samples: Option<usize>,
    /// Number of `t` values or random cases, where the scenario has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Decreasing box sizes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<f64>,
    /// Increasing frequency radii, or decreasing ball radii for the
    /// density scenarios.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    /// Fraction of sampled parameters that must satisfy an almost-every
    /// statement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            n: default_n(),
            sets: Vec::new(),
            rotation_samples: None,
            samples: None,
            seed: 0,
            scales: Vec::new(),
            radii: Vec::new(),
            pass_fraction: None,
            tolerance: None,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))
    }

    /// Every unset field filled from the scenario defaults for this `n`,
    /// then validated.
    pub fn resolved(&self) -> Result<Self> {
        let sc = scenarios::find(&self.scenario)?;
        let d = (sc.defaults)(self.n)?;
        let mut out = self.clone();
        if out.sets.is_empty() {
            out.sets = d.sets;
        }
        if out.scales.is_empty() {
            out.scales = d.scales;
        }
        if out.radii.is_empty() {
            out.radii = d.radii;
        }
        out.rotation_samples = out.rotation_samples.or(d.rotation_samples);
        out.samples = out.samples.or(d.samples);
        out.pass_fraction = out.pass_fraction.or(Some(d.pass_fraction));
        out.tolerance = out.tolerance.or(Some(d.tolerance));
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RunnerError::Config(m));
        if !(1..=3).contains(&self.n) {
            return bad(format!("n = {} outside 1..=3", self.n));
        }
        for (i, s) in self.sets.iter().enumerate() {
            s.validate().map_err(|e| RunnerError::Config(format!("sets[{i}]: {e}")))?;
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("scales must be positive".into());
        }
        if self.scales.windows(2).any(|w| !(w[0] > w[1])) {
            return bad("scales must be strictly decreasing".into());
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("radii must be positive".into());
        }
        if let Some(f) = self.pass_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("pass_fraction {f} outside (0, 1]"));
            }
        }
        if let Some(t) = self.tolerance {
            if !t.is_finite() {
                return bad("tolerance must be finite".into());
            }
        }
        if self.rotation_samples == Some(0) || self.samples == Some(0) {
            return bad("sample counts must be positive".into());
        }
        Ok(())
    }

    pub fn pass_fraction(&self) -> f64 {
        self.pass_fraction.unwrap_or(1.0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(0.0)
    }

    pub fn rotation_samples(&self) -> usize {
        self.rotation_samples.unwrap_or(1)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(1)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// Compact JSON with sorted keys and without `output_dir`, which
    /// decides where results go but not what they are.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let value = serde_json::to_value(&c).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Hex SHA-256 of [`ScenarioConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Pinned per-scenario values used by [`ScenarioConfig::resolved`].
#[derive(Debug, Clone)]
pub struct Defaults {
    pub sets: Vec<FractalSpec>,
    pub rotation_samples: Option<usize>,
    pub samples: Option<usize>,
    pub scales: Vec<f64>,
    pub radii: Vec<f64>,
    pub pass_fraction: f64,
    pub tolerance: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            sets: Vec::new(),
            rotation_samples: None,
            samples: None,
            scales: Vec::new(),
            radii: Vec::new(),
            pass_fraction: 0.9,
            tolerance: 0.1,
        }
    }
}
