//! Named scenarios. Each one takes a resolved [`ScenarioConfig`], measures
//! the quantities a single claim is about, and returns them as ruled
//! [`Group`]s; [`run_scenario`] turns that into an [`ExperimentRecord`].

mod audits;
mod projections;
mod spectral;

use std::fmt::Write as _;
use std::time::Instant;

use fractal_lab::dimension::BoxDimension;
use fractal_lab::fit::ScalingFit;
use fractal_lab::measure::DiscreteMeasure;
use fractal_lab::table::MeasureMetadata;
use fractal_lab::{ConstructedSet, FractalSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Defaults, ScenarioConfig};
use crate::error::{Result, RunnerError};
use crate::record::{ExperimentRecord, Group};

/// Sets with more atoms than this are recorded by recipe only.
pub const MEASURE_DUMP_CAP: usize = 1 << 16;

pub struct Scenario {
    pub name: &'static str,
    /// One-line statement of what is checked and how `tolerance` is read.
    pub claim: &'static str,
    pub defaults: fn(usize) -> Result<Defaults>,
    pub run: fn(&ScenarioConfig, &mut Artifacts) -> Result<Outcome>,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub groups: Vec<Group>,
    pub notes: Vec<String>,
}

/// Files produced by a run, written by the caller once the run is done.
#[derive(Debug, Default)]
pub struct Artifacts {
    /// `(file name, contents)`, names like `profile_<what>.csv`.
    pub tables: Vec<(String, String)>,
    /// Measures above [`MEASURE_DUMP_CAP`] atoms are `None`: only the
    /// metadata, which holds the recipe, is kept.
    pub measures: Vec<(String, Option<DiscreteMeasure>, MeasureMetadata)>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, contents: String) {
        self.tables.push((format!("profile_{name}.csv"), contents));
    }

    /// Keep the set's measure (when small enough) and recipe.
    pub fn set(&mut self, name: &str, set: &ConstructedSet, seed: u64) {
        let meta = MeasureMetadata {
            provenance: serde_json::to_value(&set.provenance).unwrap_or_default(),
            seed: Some(seed),
            nominal_dimension: Some(set.nominal_dimension),
        };
        let mu = (set.measure.len() <= MEASURE_DUMP_CAP).then(|| set.measure.clone());
        self.measures.push((name.to_string(), mu, meta));
    }
}

/// Box-count fits of several samples as one long table.
pub(crate) struct FitTable(String);

impl FitTable {
    pub fn new() -> Self {
        Self("label,log_inv_scale,log_count,in_window\n".into())
    }

    pub fn add(&mut self, label: &str, b: &BoxDimension) {
        self.add_fit(label, &b.fit);
    }

    pub fn add_fit(&mut self, label: &str, f: &ScalingFit) {
        for (i, (x, y)) in f.log_scales.iter().zip(&f.log_values).enumerate() {
            let inside = (f.scale_window.0..f.scale_window.1).contains(&i);
            let _ = writeln!(self.0, "{label},{x},{y},{}", inside as u8);
        }
    }

    pub fn finish(self) -> String {
        self.0
    }
}

pub static REGISTRY: &[Scenario] = &[
    projections::THM_PI_AC,
    projections::THM_PI_DIM,
    projections::THM_S_AC,
    projections::THM_S_DIM,
    projections::THM_S_TRIVIAL,
    projections::SHARP_PI,
    projections::SHARP_S_SUBGROUP,
    projections::PROD_THM3,
    spectral::DECAY_SPHERICAL,
    spectral::DECAY_DIRECTIONAL,
    spectral::DECAY_CONE,
    audits::LEMMA_CONCENTRATION,
    spectral::PARSEVAL,
    audits::DISTANCE_CONSISTENCY,
];

pub fn find(name: &str) -> Result<&'static Scenario> {
    REGISTRY
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| RunnerError::UnknownScenario(name.to_string()))
}

/// Run a scenario on its resolved config. Artifacts are returned, not
/// written.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(ExperimentRecord, Artifacts)> {
    let cfg = cfg.resolved()?;
    let sc = find(&cfg.scenario)?;
    log::info!("{}: start (hash {})", sc.name, &cfg.hash()[..8]);
    let start = Instant::now();
    let mut art = Artifacts::default();
    let out = (sc.run)(&cfg, &mut art)?;
    let secs = start.elapsed().as_secs_f64();
    let record = ExperimentRecord::new(&cfg, out.groups, out.notes, secs);
    log::info!("{}: {} in {secs:.1}s", sc.name, if record.pass { "pass" } else { "FAIL" });
    Ok((record, art))
}

// ---- helpers shared by the scenario files ----

pub(crate) fn build(spec: &FractalSpec) -> Result<ConstructedSet> {
    let t = Instant::now();
    let set = spec.build()?;
    log::debug!("built {} atoms in {:.2?}", set.measure.len(), t.elapsed());
    Ok(set)
}

pub(crate) fn need_sets(cfg: &ScenarioConfig, at_least: usize) -> Result<()> {
    if cfg.sets.len() < at_least {
        return Err(RunnerError::Config(format!(
            "{} needs at least {at_least} set(s); there are no default sets for n = {}",
            cfg.scenario, cfg.n
        )));
    }
    Ok(())
}

pub(crate) fn check_ambient(cfg: &ScenarioConfig, set: &ConstructedSet, want: usize, i: usize) -> Result<()> {
    let d = set.measure.ambient_dim();
    if d != want {
        return Err(RunnerError::Config(format!(
            "sets[{i}] lives in R^{d}, {} with n = {} needs R^{want}",
            cfg.scenario, cfg.n
        )));
    }
    Ok(())
}

/// The scales at or above the set's resolution.
pub(crate) fn usable_scales(scales: &[f64], resolution: f64) -> Vec<f64> {
    scales.iter().copied().filter(|&s| s >= resolution).collect()
}

/// Seed for an independent sub-computation of run `seed`.
pub(crate) fn sub_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Projection parameters `t = +-e^u` with `u` uniform on `[ln 1/2, ln 2]`
/// and a fair sign, one ChaCha stream per index. Small `|t|` is left out:
/// `pi_t` tends to the coordinate projection as `t -> 0`, and no finite
/// construction level resolves that limit.
pub(crate) fn t_values(count: usize, seed: u64) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u: f64 = rng.random_range(-std::f64::consts::LN_2..std::f64::consts::LN_2);
            if rng.random::<bool>() {
                u.exp()
            } else {
                -u.exp()
            }
        })
        .collect()
}

/// `base^(-k/steps)` for `k = from..=to`.
pub(crate) fn grid(base: f64, from: u32, to: u32, steps: u32) -> Vec<f64> {
    fractal_lab::dimension::geometric_scales(base, from, to, steps)
}

/// `4 * 2^(k/2)`, `k = 0..=8`: half-octave radii from 4 to 64.
pub(crate) fn radii_4_to_64() -> Vec<f64> {
    (0..=8).map(|k| 4.0 * 2f64.powf(k as f64 / 2.0)).collect()
}

pub const LOG2_LOG3: f64 = 0.630_929_753_571_457_4;
