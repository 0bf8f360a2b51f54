//! Box-counting and energy-based dimension estimates, and detection of
//! positive Lebesgue measure from covered volume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{ScalingFit, MIN_FIT_POINTS};
use crate::fractal::ConstructedSet;
use crate::measure::DiscreteMeasure;
use crate::par;
use crate::spectral::riesz_energy_spatial;

/// Largest ambient dimension the cell hashing supports.
pub const MAX_BOX_DIM: usize = 4;
/// Grids per scale: the unshifted one plus seeded random shifts.
pub const GRID_OFFSETS: usize = 4;
/// Scales whose mean count is below this are a coarse plateau.
pub const PLATEAU_COUNT: f64 = 8.0;
/// Scales whose mean count reaches this fraction of the atom count are
/// saturated.
pub const SATURATION_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    pub scale: f64,
    pub occupied: f64,
}

/// `delta_j = base^{-j / steps_per_power}` for `j` in `from..=to`.
pub fn geometric_scales(base: f64, from: u32, to: u32, steps_per_power: u32) -> Vec<f64> {
    (from..=to)
        .map(|j| base.powf(-(j as f64) / steps_per_power as f64))
        .collect()
}

fn check_cloud(points: &DiscreteMeasure) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    if points.ambient_dim() > MAX_BOX_DIM {
        return Err(Error::UnsupportedDimension(points.ambient_dim()));
    }
    Ok(())
}

/// Number of axis-aligned cells `prod [k_i delta, (k_i + 1) delta)` of the
/// grid shifted by `offset` that contain an atom.
pub fn occupied_cells(points: &DiscreteMeasure, delta: f64, offset: &[f64]) -> Result<u64> {
    check_cloud(points)?;
    let d = points.ambient_dim();
    let mut keys: Vec<[i64; MAX_BOX_DIM]> = par::map_indexed(points.len(), |j| {
        let p = points.point(j);
        let mut k = [0i64; MAX_BOX_DIM];
        for i in 0..d {
            k[i] = ((p[i] + offset.get(i).copied().unwrap_or(0.0)) / delta).floor() as i64;
        }
        k
    });
    par::sort_unstable(&mut keys);
    keys.dedup();
    Ok(keys.len() as u64)
}

/// Unshifted cell counts at each scale.
pub fn box_counts(points: &DiscreteMeasure, scales: &[f64]) -> Result<Vec<BoxCount>> {
    let zero = vec![0.0; points.ambient_dim()];
    scales
        .iter()
        .map(|&s| {
            Ok(BoxCount {
                scale: s,
                occupied: occupied_cells(points, s, &zero)? as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    /// Slope of `log(count)` against `log(1/delta)` over the trimmed window.
    pub fit: ScalingFit,
    /// Mean counts over the grid offsets, one per input scale.
    pub counts: Vec<BoxCount>,
    /// Largest minus smallest slope over the individual offsets.
    pub offset_spread: f64,
}

fn validate_scales(scales: &[f64], floor: f64) -> Result<()> {
    if scales.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientScales {
            needed: MIN_FIT_POINTS,
            got: scales.len(),
        });
    }
    if scales.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidSpec("scales must be strictly decreasing".into()));
    }
    let smallest = *scales.last().unwrap();
    if smallest < floor * (1.0 - 1e-12) {
        return Err(Error::BelowResolution {
            value: smallest,
            floor,
        });
    }
    Ok(())
}

/// Counts per offset (rows) and scale (columns).
fn offset_counts(points: &DiscreteMeasure, scales: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = points.ambient_dim();
    let coarse = scales[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = vec![vec![0.0; d]];
    for _ in 1..GRID_OFFSETS {
        offsets.push((0..d).map(|_| rng.random::<f64>() * coarse).collect());
    }
    offsets
        .iter()
        .map(|o| {
            scales
                .iter()
                .map(|&s| occupied_cells(points, s, o).map(|c| c as f64))
                .collect()
        })
        .collect()
}

/// Indices of scales kept after removing the plateau and saturated ends.
fn trim_window(means: &[f64], atoms: usize) -> Result<(usize, usize)> {
    let sat = SATURATION_FRACTION * atoms as f64;
    let keep: Vec<usize> = (0..means.len())
        .filter(|&i| means[i] >= PLATEAU_COUNT && means[i] < sat)
        .collect();
    let (Some(&lo), Some(&hi)) = (keep.first(), keep.last()) else {
        return Err(Error::InsufficientScales {
            needed: MIN_FIT_POINTS,
            got: 0,
        });
    };
    if hi + 1 - lo < MIN_FIT_POINTS {
        return Err(Error::InsufficientScales {
            needed: MIN_FIT_POINTS,
            got: hi + 1 - lo,
        });
    }
    Ok((lo, hi + 1))
}

fn log_inv(scales: &[f64]) -> Vec<f64> {
    scales.iter().map(|s| -s.ln()).collect()
}

/// Box-counting dimension with counts averaged over [`GRID_OFFSETS`] grids.
pub fn box_dimension(points: &DiscreteMeasure, scales: &[f64], resolution_floor: f64) -> Result<BoxDimension> {
    box_dimension_seeded(points, scales, resolution_floor, 0)
}

pub fn box_dimension_seeded(
    points: &DiscreteMeasure,
    scales: &[f64],
    resolution_floor: f64,
    seed: u64,
) -> Result<BoxDimension> {
    check_cloud(points)?;
    validate_scales(scales, resolution_floor)?;
    let rows = offset_counts(points, scales, seed)?;
    let means: Vec<f64> = (0..scales.len())
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64)
        .collect();
    let window = trim_window(&means, points.len())?;
    let x = log_inv(scales);
    let fit = ScalingFit::windowed(x.clone(), means.iter().map(|c| c.ln()).collect(), window)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in &rows {
        let f = ScalingFit::windowed(x.clone(), r.iter().map(|c| c.ln()).collect(), window)?;
        lo = lo.min(f.slope);
        hi = hi.max(f.slope);
    }
    Ok(BoxDimension {
        fit,
        counts: scales
            .iter()
            .zip(&means)
            .map(|(&scale, &occupied)| BoxCount { scale, occupied })
            .collect(),
        offset_spread: hi - lo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Null,
    Inconclusive,
}

/// Covered volume counts as flat when its fitted slope is within this of 0.
pub const FLAT_SLOPE: f64 = 0.15;
/// Covered volume counts as vanishing when its slope is at most this.
pub const NULL_SLOPE: f64 = -0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Positivity {
    /// `log(count * delta^d)` against `log(1/delta)`.
    pub covered_volume: ScalingFit,
    pub verdict: Verdict,
}

impl Verdict {
    pub fn from_slope(slope: f64) -> Self {
        if slope.abs() <= FLAT_SLOPE {
            Verdict::Positive
        } else if slope <= NULL_SLOPE {
            Verdict::Null
        } else {
            Verdict::Inconclusive
        }
    }
}

pub fn lebesgue_positivity(points: &DiscreteMeasure, scales: &[f64], resolution_floor: f64) -> Result<Positivity> {
    let bd = box_dimension(points, scales, resolution_floor)?;
    let d = points.ambient_dim() as i32;
    let vol: Vec<f64> = bd
        .counts
        .iter()
        .map(|c| (c.occupied * c.scale.powi(d)).ln())
        .collect();
    let covered_volume = ScalingFit::windowed(bd.fit.log_scales.clone(), vol, bd.fit.scale_window)?;
    Ok(Positivity {
        verdict: Verdict::from_slope(covered_volume.slope),
        covered_volume,
    })
}

/// Growth factor of the energy between two levels below which it is taken
/// to stay bounded.
pub const ENERGY_GROWTH_LIMIT: f64 = 1.5;
/// Levels between the coarse and fine measures of the sweep.
pub const LEVEL_GAP: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDimension {
    pub value: f64,
    /// No pair of distinct atoms, so every energy vanishes.
    pub zero_dimensional: bool,
    /// `(s, I_s(fine) / I_s(coarse))` over the grid.
    pub growth: Vec<(f64, f64)>,
}

/// Largest `s` in the grid whose spatial energy grows by less than
/// [`ENERGY_GROWTH_LIMIT`] from `coarse` to `fine`.
pub fn energy_dimension_from_levels(
    coarse: &DiscreteMeasure,
    fine: &DiscreteMeasure,
    s_grid: &[f64],
) -> Result<EnergyDimension> {
    if s_grid.is_empty() || s_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidSpec("s grid must be nonempty and increasing".into()));
    }
    let mut growth = Vec::with_capacity(s_grid.len());
    let mut best = None;
    let mut any_energy = false;
    for &s in s_grid {
        let a = riesz_energy_spatial(coarse, s)?.value;
        let b = riesz_energy_spatial(fine, s)?.value;
        any_energy |= b > 0.0;
        let ratio = if a > 0.0 { b / a } else { f64::INFINITY };
        if b > 0.0 && ratio < ENERGY_GROWTH_LIMIT {
            best = Some(s);
        }
        growth.push((s, ratio));
    }
    Ok(EnergyDimension {
        value: best.unwrap_or(s_grid[0]),
        zero_dimensional: !any_energy || best.is_none(),
        growth,
    })
}

/// [`energy_dimension_from_levels`] with the coarse level rebuilt from the
/// set's recipe, [`LEVEL_GAP`] levels below its own.
pub fn energy_dimension(set: &ConstructedSet, s_grid: &[f64]) -> Result<EnergyDimension> {
    let level = set.provenance.leaf_level().ok_or(Error::NoLevelSweep)?;
    if level <= 1 {
        return Err(Error::NoLevelSweep);
    }
    let coarse_level = level.saturating_sub(LEVEL_GAP).max(1);
    let coarse = set.provenance.at_level(coarse_level).build()?;
    energy_dimension_from_levels(&coarse.measure, &set.measure, s_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::build_cantor;

    const MIDDLE_THIRDS: f64 = std::f64::consts::LN_2 / 1.0986122886681098;

    #[test]
    fn exact_cantor_counts() {
        let c = build_cantor(MIDDLE_THIRDS, 12).unwrap();
        let scales = geometric_scales(3.0, 0, 12, 1);
        for (j, bc) in box_counts(&c.measure, &scales).unwrap().iter().enumerate() {
            assert_eq!(bc.occupied, (1u64 << j) as f64, "j={j}");
        }
    }

    #[test]
    fn cantor_dimension() {
        let c = build_cantor(MIDDLE_THIRDS, 12).unwrap();
        let bd = box_dimension(&c.measure, &geometric_scales(3.0, 1, 12, 1), c.resolution).unwrap();
        assert!((bd.fit.slope - 0.6309).abs() < 0.05, "{}", bd.fit.slope);
        assert!(bd.fit.points_used() >= 4);
    }

    #[test]
    fn empty_and_short() {
        let one = DiscreteMeasure::dirac(&[0.5], 1.0).unwrap();
        let scales = geometric_scales(2.0, 1, 8, 1);
        assert_eq!(box_dimension(&one, &scales[..3], 0.0).unwrap_err().code(), "insufficient_scales");
        // a single atom never leaves the plateau
        assert_eq!(box_dimension(&one, &scales, 0.0).unwrap_err().code(), "insufficient_scales");
        assert_eq!(
            box_dimension(&one, &scales, 0.1).unwrap_err().code(),
            "below_resolution"
        );
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_slope(0.1), Verdict::Positive);
        assert_eq!(Verdict::from_slope(-0.15), Verdict::Positive);
        assert_eq!(Verdict::from_slope(-0.2), Verdict::Inconclusive);
        assert_eq!(Verdict::from_slope(-0.3), Verdict::Null);
        assert_eq!(Verdict::from_slope(0.5), Verdict::Inconclusive);
    }

    #[test]
    fn single_atom_energy_dimension() {
        let one = DiscreteMeasure::dirac(&[0.5], 1.0).unwrap();
        let e = energy_dimension_from_levels(&one, &one, &[0.2, 0.4]).unwrap();
        assert!(e.zero_dimensional);
        assert_eq!(e.value, 0.2);
    }

    #[test]
    fn single_level_recipe() {
        let c = build_cantor(0.5, 1).unwrap();
        assert_eq!(energy_dimension(&c, &[0.3]).unwrap_err().code(), "no_level_sweep");
    }
}
