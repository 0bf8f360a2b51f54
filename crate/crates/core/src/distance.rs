//! Distance measures `delta(mu, nu)(B) = mu x nu({(x, y) : |x - y| in B})`
//! as histograms, their L2 behavior, and the weighted pairing
//! `int delta(mu)(t) delta(nu)(t) t^{1-n} dt`.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    ball_masses_sorted, check_dim, compensated_sum, dist2, pushforward, unit_ball_volume, unit_sphere_area,
    DiscreteMeasure,
};
use crate::par;
use crate::rotation::{apply_s, RotationMeasure};

/// Uniform bins `[k w, (k + 1) w)` starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub width: f64,
    /// Upper end of the last bin; defaults to the diameter of the supports.
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeasure {
    pub bin_edges: Vec<f64>,
    /// Mass per bin, excluding pairs at distance 0.
    pub masses: Vec<f64>,
    /// Mass of pairs at distance exactly 0.
    pub diagonal_mass: f64,
    pub source_mass: f64,
}

impl DistanceMeasure {
    /// A histogram given directly by its bins.
    pub fn from_bins(bin_edges: Vec<f64>, masses: Vec<f64>, diagonal_mass: f64) -> Result<Self> {
        if bin_edges.len() != masses.len() + 1 {
            return Err(Error::Dimension {
                expected: masses.len() + 1,
                got: bin_edges.len(),
            });
        }
        if bin_edges[0] != 0.0 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec("bin edges must start at 0 and increase".into()));
        }
        if masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidMeasure("negative bin mass".into()));
        }
        let source_mass = compensated_sum(masses.iter().copied()) + diagonal_mass;
        Ok(Self {
            bin_edges,
            masses,
            diagonal_mass,
            source_mass,
        })
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    pub fn density(&self, i: usize) -> f64 {
        self.masses[i] / self.width(i)
    }

    pub fn off_diagonal_mass(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    /// Merge adjacent bins pairwise; an odd last bin is doubled in width.
    pub fn coarsened(&self) -> Self {
        let mut edges = vec![0.0];
        let mut masses = Vec::new();
        let mut i = 0;
        while i < self.bins() {
            if i + 1 < self.bins() {
                edges.push(self.bin_edges[i + 2]);
                masses.push(self.masses[i] + self.masses[i + 1]);
            } else {
                edges.push(self.bin_edges[i] + 2.0 * self.width(i));
                masses.push(self.masses[i]);
            }
            i += 2;
        }
        Self {
            bin_edges: edges,
            masses,
            diagonal_mass: self.diagonal_mass,
            source_mass: self.source_mass,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,mass\n");
        for i in 0..self.bins() {
            let _ = writeln!(s, "{},{},{}", self.bin_edges[i], self.bin_edges[i + 1], self.masses[i]);
        }
        s
    }
}

const BLOCK_ROWS: usize = 64;

/// Histogram of `|x - y|` over all atom pairs, weighted by `w_x w_y`.
pub fn distance_measure(mu: &DiscreteMeasure, nu: &DiscreteMeasure, bins: &BinSpec) -> Result<DistanceMeasure> {
    check_dim(mu.ambient_dim(), nu.ambient_dim())?;
    let floor = mu.resolution().max(nu.resolution());
    if !(bins.width >= floor && bins.width > 0.0) {
        return Err(Error::BinsTooFine {
            width: bins.width,
            resolution: floor,
        });
    }
    let max = match bins.max {
        Some(m) => m,
        None => support_diameter(mu, nu),
    };
    let count = ((max / bins.width).floor() as usize + 1).max(1);
    let edges: Vec<f64> = (0..=count).map(|k| k as f64 * bins.width).collect();
    let blocks = mu.len().div_ceil(BLOCK_ROWS);
    let partials = par::map_indexed(blocks, |b| {
        let mut hist = vec![0.0; count];
        let mut diag = 0.0;
        for i in b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(mu.len()) {
            let x = mu.point(i);
            let wx = mu.weights()[i];
            for (j, &wy) in nu.weights().iter().enumerate() {
                let t = dist2(x, nu.point(j)).sqrt();
                if t == 0.0 {
                    diag += wx * wy;
                } else {
                    let k = ((t / bins.width) as usize).min(count - 1);
                    hist[k] += wx * wy;
                }
            }
        }
        (hist, diag)
    });
    let mut masses = vec![0.0; count];
    let mut diagonal_mass = 0.0;
    for (h, d) in partials {
        for (m, v) in masses.iter_mut().zip(h) {
            *m += v;
        }
        diagonal_mass += d;
    }
    Ok(DistanceMeasure {
        bin_edges: edges,
        masses,
        diagonal_mass,
        source_mass: mu.total_mass() * nu.total_mass(),
    })
}

fn support_diameter(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    match (mu.bounding_box(), nu.bounding_box()) {
        (Some((a, b)), Some((c, d))) => a
            .iter()
            .zip(&b)
            .zip(c.iter().zip(&d))
            .map(|((lo1, hi1), (lo2, hi2))| (hi1.max(*hi2) - lo1.min(*lo2)).powi(2))
            .sum::<f64>()
            .sqrt(),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Indicator {
    /// Squared L2 norm of the histogram density.
    pub value: f64,
    /// Same with bins twice as wide.
    pub coarse_value: f64,
    /// `value / coarse_value`: near 1 for an L2 density, near 2 per
    /// refinement step for an atom.
    pub refinement_ratio: f64,
}

pub fn distance_l2_indicator(dm: &DistanceMeasure) -> Result<L2Indicator> {
    if dm.bins() < 2 {
        return Err(Error::DegenerateBins);
    }
    let l2 = |d: &DistanceMeasure| (0..d.bins()).map(|i| d.masses[i].powi(2) / d.width(i)).sum::<f64>();
    let value = l2(dm);
    let coarse_value = l2(&dm.coarsened());
    Ok(L2Indicator {
        value,
        coarse_value,
        refinement_ratio: value / coarse_value,
    })
}

/// `sum_bins density_mu(t) density_nu(t) t^{1-n} width` at bin midpoints.
pub fn weighted_distance_pairing(dmu: &DistanceMeasure, dnu: &DistanceMeasure, n: usize) -> Result<f64> {
    if dmu.bin_edges != dnu.bin_edges {
        return Err(Error::BinMismatch);
    }
    Ok((0..dmu.bins())
        .map(|i| dmu.density(i) * dnu.density(i) * dmu.midpoint(i).powi(1 - n as i32) * dmu.width(i))
        .sum())
}

/// Settings for [`distance_consistency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencySpec {
    /// Decreasing radii for the lower density, all above the resolution.
    pub radii: Vec<f64>,
    /// Fixed radius for the ball-average expression.
    pub r: f64,
    pub bin_width: f64,
    /// Atoms of each `S_g` image at which densities are sampled.
    pub centers: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    /// `int int D(lambda_g)(z)^2 dz dtheta(g)` as the `lambda_g`-average of
    /// the lower density, `lambda_g = S_g#(mu x nu)`.
    pub lower_density: f64,
    /// `int int alpha(n)^{-1} r^{-n} lambda_g(B(z, r)) dlambda_g(z) dtheta(g)`.
    pub ball_average: f64,
    /// `|S^{n-1}|^{-1} int delta(mu) delta(nu) t^{1-n} dt`.
    pub pairing: f64,
    pub pairing_constant: f64,
}

impl Consistency {
    /// Largest ratio between any two of the three quantities.
    pub fn max_ratio(&self) -> f64 {
        let v = [self.lower_density, self.ball_average, self.pairing];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo
    }
}

/// The three sides of the chain relating the density of `S_g#(mu x nu)` to
/// the pairing of distance measures, each from its own estimator.
pub fn distance_consistency(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    theta: &RotationMeasure,
    spec: &ConsistencySpec,
) -> Result<Consistency> {
    let n = mu.ambient_dim();
    check_dim(n, nu.ambient_dim())?;
    check_dim(n, theta.dim)?;
    let product = crate::measure::product_measure(mu, nu)?;
    let alpha = unit_ball_volume(n);
    let mut radii = spec.radii.clone();
    radii.push(spec.r);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let r_index = radii.iter().position(|&x| x == spec.r).unwrap();
    let per_g = theta
        .samples
        .iter()
        .enumerate()
        .map(|(gi, g)| -> Result<(f64, f64)> {
            let lambda = pushforward(&product, |p| apply_s(g, &p[..n], &p[n..]).expect("dims checked"))?;
            let pick = WeightedIndex::new(lambda.weights())
                .map_err(|e| Error::InvalidMeasure(format!("{e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (gi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let centers: Vec<usize> = (0..spec.centers).map(|_| pick.sample(&mut rng)).collect();
            let rows = par::map_slice(&centers, |&c| ball_masses_sorted(&lambda, lambda.point(c), &radii));
            let mut lower = 0.0;
            let mut ball = 0.0;
            for m in &rows {
                let dens = spec
                    .radii
                    .iter()
                    .map(|&r| {
                        let k = radii.iter().position(|&x| x == r).unwrap();
                        m[k] / (alpha * r.powi(n as i32))
                    })
                    .fold(f64::INFINITY, f64::min);
                lower += dens;
                ball += m[r_index] / (alpha * spec.r.powi(n as i32));
            }
            let k = rows.len().max(1) as f64;
            Ok((lower / k, ball / k))
        })
        .collect::<Result<Vec<_>>>()?;
    let wsum = theta.total_weight();
    let avg = |f: fn(&(f64, f64)) -> f64| -> f64 {
        per_g.iter().zip(&theta.weights).map(|(v, w)| f(v) * w).sum::<f64>() / wsum
    };
    let bins = BinSpec {
        width: spec.bin_width,
        max: Some(support_diameter(mu, nu).max(support_diameter(nu, nu))),
    };
    let dmu = distance_measure(mu, mu, &bins)?;
    let dnu = distance_measure(nu, nu, &bins)?;
    let pairing_constant = 1.0 / unit_sphere_area(n);
    Ok(Consistency {
        lower_density: avg(|v| v.0),
        ball_average: avg(|v| v.1),
        pairing: pairing_constant * weighted_distance_pairing(&dmu, &dnu, n)?,
        pairing_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_atom_distances() {
        let mu = DiscreteMeasure::uniform(1, vec![0.0, 1.0], 1.0, 0.0).unwrap();
        let dm = distance_measure(&mu, &mu, &BinSpec { width: 0.25, max: None }).unwrap();
        assert_eq!(dm.diagonal_mass, 0.5);
        assert!((dm.off_diagonal_mass() - 0.5).abs() < 1e-15);
        assert_eq!(dm.masses.iter().filter(|m| **m > 0.0).count(), 1);
        assert!(*dm.bin_edges.last().unwrap() >= 1.0);
    }

    #[test]
    fn bins_too_fine() {
        let mu = DiscreteMeasure::uniform(1, vec![0.0, 1.0], 1.0, 0.1).unwrap();
        assert_eq!(
            distance_measure(&mu, &mu, &BinSpec { width: 0.05, max: None }).unwrap_err().code(),
            "bins_too_fine"
        );
    }

    #[test]
    fn uniform_density_indicator() {
        let k = 100;
        let edges: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let dm = DistanceMeasure::from_bins(edges, vec![1.0 / k as f64; k], 0.0).unwrap();
        let ind = distance_l2_indicator(&dm).unwrap();
        assert!((ind.value - 1.0).abs() < 0.05);
        assert!((ind.refinement_ratio - 1.0).abs() < 1e-12);
        let one = DistanceMeasure::from_bins(vec![0.0, 1.0], vec![1.0], 0.0).unwrap();
        assert_eq!(distance_l2_indicator(&one).unwrap_err().code(), "degenerate_bins");
    }

    #[test]
    fn atomic_pair_is_flagged() {
        let mu = DiscreteMeasure::uniform(1, vec![0.0, 1.0], 1.0, 0.0).unwrap();
        let dm = distance_measure(&mu, &mu, &BinSpec { width: 0.1, max: None }).unwrap();
        assert!(distance_l2_indicator(&dm).unwrap().refinement_ratio >= 2.0 - 1e-12);
    }

    #[test]
    fn pairing_on_unit_interval_above_one() {
        let k = 400;
        let edges: Vec<f64> = (0..=2 * k).map(|i| i as f64 / k as f64).collect();
        let masses: Vec<f64> = (0..2 * k).map(|i| if i >= k { 1.0 / k as f64 } else { 0.0 }).collect();
        let dm = DistanceMeasure::from_bins(edges.clone(), masses.clone(), 0.0).unwrap();
        let v = weighted_distance_pairing(&dm, &dm, 2).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 0.02);
        let low: Vec<f64> = masses.iter().rev().cloned().collect();
        let dl = DistanceMeasure::from_bins(edges, low, 0.0).unwrap();
        assert_eq!(weighted_distance_pairing(&dm, &dl, 2).unwrap(), 0.0);
        let other = DistanceMeasure::from_bins(vec![0.0, 0.5, 1.0], vec![0.5, 0.5], 0.0).unwrap();
        assert_eq!(weighted_distance_pairing(&dm, &other, 2).unwrap_err().code(), "bin_mismatch");
    }
}
