//! Finite weighted point clouds standing in for compactly supported measures.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::par;

/// Largest admissible coordinate magnitude.
pub const MAX_COORD: f64 = 1e6;
/// Default cap on the number of atoms a construction may produce.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / gamma(h + 1.0)
}

/// Surface area of the unit sphere `S^{d-1}` (2 for `d = 1`).
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// A measure `sum_j w_j delta_{x_j}` on `R^d`.
///
/// Immutable once built; `resolution` is the finest scale of the construction
/// that produced it and acts as a floor for every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
    resolution: f64,
}

impl DiscreteMeasure {
    /// `coords` is row-major: atom `j` occupies `coords[j*dim..(j+1)*dim]`.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>, resolution: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("ambient dimension must be positive".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} coordinates do not split into {} atoms of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative real")));
        }
        if let Some(c) = coords.iter().find(|c| !(c.is_finite() && c.abs() <= MAX_COORD)) {
            return Err(Error::InvalidMeasure(format!("coordinate {c} outside the bounded support")));
        }
        if !(resolution.is_finite() && resolution >= 0.0) {
            return Err(Error::InvalidMeasure(format!("resolution {resolution} is invalid")));
        }
        let total_mass = compensated_sum(weights.iter().copied());
        Ok(Self {
            dim,
            coords,
            weights,
            total_mass,
            resolution,
        })
    }

    /// Equal weights summing to `mass`.
    pub fn uniform(dim: usize, coords: Vec<f64>, mass: f64, resolution: f64) -> Result<Self> {
        let n = coords.len() / dim.max(1);
        let w = if n == 0 { 0.0 } else { mass / n as f64 };
        Self::new(dim, coords, vec![w; n], resolution)
    }

    pub fn dirac(point: &[f64], weight: f64) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![weight], 0.0)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution.max(0.0);
        self
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Axis-aligned bounding box `(min, max)`; `None` when empty.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Center of the bounding box and the largest distance of an atom from it.
    pub fn enclosing_ball(&self) -> (Vec<f64>, f64) {
        let Some((lo, hi)) = self.bounding_box() else {
            return (vec![0.0; self.dim], 0.0);
        };
        let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = self
            .points()
            .map(|p| dist2(p, &c))
            .fold(0.0, f64::max)
            .sqrt();
        (c, r)
    }

    /// Diagonal of the bounding box; an upper bound for the support diameter.
    pub fn bbox_diameter(&self) -> f64 {
        match self.bounding_box() {
            None => 0.0,
            Some((lo, hi)) => lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        check_dim(self.dim, shift.len())?;
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b))
            .collect();
        Self::new(self.dim, coords, self.weights.clone(), self.resolution)
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled_mass(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.coords.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.resolution,
        )
    }

    /// Embed into `R^{dim + extra}` by appending zero coordinates.
    pub fn pad_zeros(&self, extra: usize) -> Result<Self> {
        let d = self.dim + extra;
        let coords = self
            .points()
            .flat_map(|p| p.iter().copied().chain(std::iter::repeat_n(0.0, extra)))
            .collect();
        Self::new(d, coords, self.weights.clone(), self.resolution)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closed Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::DegenerateInput(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }
}

/// `mu(B(x, r))` for the closed ball.
pub fn ball_mass(mu: &DiscreteMeasure, b: &Ball) -> Result<f64> {
    check_dim(mu.dim, b.center.len())?;
    let r2 = b.radius * b.radius;
    Ok(compensated_sum(
        mu.points()
            .zip(&mu.weights)
            .filter(|(p, _)| dist2(p, &b.center) <= r2)
            .map(|(_, &w)| w),
    ))
}

/// Masses of the closed balls of every radius in `radii_sorted` (ascending)
/// around `center`, computed in one pass over the atoms.
pub(crate) fn ball_masses_sorted(mu: &DiscreteMeasure, center: &[f64], radii_sorted: &[f64]) -> Vec<f64> {
    let r2: Vec<f64> = radii_sorted.iter().map(|r| r * r).collect();
    let mut bucket = vec![0.0; r2.len() + 1];
    for (p, &w) in mu.points().zip(&mu.weights) {
        let d2 = dist2(p, center);
        let k = r2.partition_point(|&q| q < d2);
        bucket[k] += w;
    }
    let mut acc = 0.0;
    bucket[..r2.len()]
        .iter()
        .map(|b| {
            acc += b;
            acc
        })
        .collect()
}

/// Where the Frostman audit places its ball centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CenterPolicy {
    /// `count` atoms drawn by weight with a seeded generator.
    Sampled { count: usize, seed: u64 },
    /// Every atom.
    AllAtoms,
    Explicit(Vec<Vec<f64>>),
}

impl Default for CenterPolicy {
    fn default() -> Self {
        CenterPolicy::Sampled { count: 256, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanEstimate {
    /// Fitted slope clamped to `[0, ambient_dim]`.
    pub exponent: f64,
    pub constant: f64,
    pub radii_used: Vec<f64>,
    /// Smallest `v >= 0` with `max_x mu(B(x,r)) <= C r^s (1 + v)` on the audit set.
    pub max_violation: f64,
    pub raw_slope: f64,
    pub r_squared: f64,
    /// `max_x mu(B(x, r))` for each radius in `radii_used`.
    pub max_masses: Vec<f64>,
}

/// Slope of `log max_x mu(B(x, r))` against `log r`.
pub fn frostman_exponent(
    mu: &DiscreteMeasure,
    radii: &[f64],
    centers: &CenterPolicy,
) -> Result<FrostmanEstimate> {
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    if radii.len() < 3 {
        return Err(Error::InsufficientScales {
            needed: 3,
            got: radii.len(),
        });
    }
    if radii[0] <= 0.0 {
        return Err(Error::DegenerateInput("radii must be positive".into()));
    }
    if radii[0] < mu.resolution {
        return Err(Error::BelowResolution {
            value: radii[0],
            floor: mu.resolution,
        });
    }
    if mu.is_empty() || mu.total_mass <= 0.0 {
        return Err(Error::EmptySet);
    }
    let centers: Vec<Vec<f64>> = match centers {
        CenterPolicy::AllAtoms => mu.points().map(<[f64]>::to_vec).collect(),
        CenterPolicy::Explicit(c) => {
            for x in c {
                check_dim(mu.dim, x.len())?;
            }
            c.clone()
        }
        CenterPolicy::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let idx = WeightedIndex::new(&mu.weights)
                .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
            (0..*count)
                .map(|_| mu.point(idx.sample(&mut rng)).to_vec())
                .collect()
        }
    };
    let per_center = par::map_slice(&centers, |c| ball_masses_sorted(mu, c, &radii));
    let mut max_masses = vec![0.0f64; radii.len()];
    for masses in &per_center {
        for (m, &v) in max_masses.iter_mut().zip(masses) {
            *m = m.max(v);
        }
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = max_masses.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let (raw_slope, intercept, r_squared) = least_squares(&lx, &ly);
    let exponent = raw_slope.clamp(0.0, mu.dim as f64);
    let constant = intercept.exp();
    let max_violation = radii
        .iter()
        .zip(&max_masses)
        .map(|(r, m)| m / (constant * r.powf(exponent)) - 1.0)
        .fold(0.0, f64::max);
    Ok(FrostmanEstimate {
        exponent,
        constant,
        radii_used: radii,
        max_violation,
        raw_slope,
        r_squared,
        max_masses,
    })
}

/// Product measure on `R^{d1 + d2}` with the default atom cap.
pub fn product_measure(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    product_measure_capped(mu, nu, DEFAULT_ATOM_CAP)
}

pub fn product_measure_capped(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cap: usize,
) -> Result<DiscreteMeasure> {
    let atoms = mu.len() as u128 * nu.len() as u128;
    if atoms > cap as u128 {
        return Err(Error::ProductTooLarge { atoms, cap });
    }
    let d = mu.dim + nu.dim;
    let mut coords = Vec::with_capacity(atoms as usize * d);
    let mut weights = Vec::with_capacity(atoms as usize);
    for (p, &wp) in mu.points().zip(&mu.weights) {
        for (q, &wq) in nu.points().zip(&nu.weights) {
            coords.extend_from_slice(p);
            coords.extend_from_slice(q);
            weights.push(wp * wq);
        }
    }
    DiscreteMeasure::new(d, coords, weights, mu.resolution.max(nu.resolution))
}

/// `f_# mu` for an arbitrary point map. Weights are carried over unchanged.
pub fn pushforward<F>(mu: &DiscreteMeasure, map: F) -> Result<DiscreteMeasure>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    let images = par::map_indexed(mu.len(), |j| map(mu.point(j)));
    let out_dim = images.first().map_or(mu.dim, Vec::len);
    if let Some(bad) = images.iter().find(|v| v.len() != out_dim) {
        return Err(Error::MapDimension {
            expected: out_dim,
            got: bad.len(),
        });
    }
    if out_dim == 0 {
        return Err(Error::MapDimension { expected: 1, got: 0 });
    }
    let coords = images.into_iter().flatten().collect();
    DiscreteMeasure::new(out_dim, coords, mu.weights.clone(), mu.resolution)
}

/// Pushforward under the linear map `x -> A x`, `A` row-major `out_dim x d`.
pub fn pushforward_linear(mu: &DiscreteMeasure, matrix: &[f64], out_dim: usize) -> Result<DiscreteMeasure> {
    let d = mu.dim;
    if matrix.len() != out_dim * d {
        return Err(Error::MapDimension {
            expected: out_dim * d,
            got: matrix.len(),
        });
    }
    let mut coords = vec![0.0; mu.len() * out_dim];
    let rows = par::map_indexed(mu.len().div_ceil(par::CHUNK), |c| {
        let lo = c * par::CHUNK;
        let hi = (lo + par::CHUNK).min(mu.len());
        let mut out = Vec::with_capacity((hi - lo) * out_dim);
        for j in lo..hi {
            let p = mu.point(j);
            for row in matrix.chunks_exact(d) {
                out.push(row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>());
            }
        }
        out
    });
    let mut at = 0;
    for r in rows {
        coords[at..at + r.len()].copy_from_slice(&r);
        at += r.len();
    }
    DiscreteMeasure::new(out_dim, coords, mu.weights.clone(), mu.resolution)
}

/// `min_r alpha(d)^{-1} r^{-d} mu(B(z, r))` over the supplied radii: a
/// finite-scale stand-in for the lower derivative at `z`.
pub fn lower_derivative_density(mu: &DiscreteMeasure, z: &[f64], radii: &[f64]) -> Result<f64> {
    check_dim(mu.dim, z.len())?;
    if radii.is_empty() {
        return Err(Error::InsufficientScales { needed: 1, got: 0 });
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateInput("radii must be strictly decreasing".into()));
    }
    let smallest = *radii.last().unwrap();
    if smallest <= 0.0 || smallest < mu.resolution {
        return Err(Error::BelowResolution {
            value: smallest,
            floor: mu.resolution,
        });
    }
    let mut asc = radii.to_vec();
    asc.reverse();
    let masses = ball_masses_sorted(mu, z, &asc);
    let alpha = unit_ball_volume(mu.dim);
    let d = mu.dim as i32;
    Ok(asc
        .iter()
        .zip(&masses)
        .map(|(r, m)| m / (alpha * r.powi(d)))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_line(n: usize) -> DiscreteMeasure {
        let coords = (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect();
        DiscreteMeasure::uniform(1, coords, 1.0, 1.0 / n as f64).unwrap()
    }

    #[test]
    fn rejects_bad_weights_and_coords() {
        assert!(DiscreteMeasure::new(1, vec![0.0], vec![-1.0], 0.0).is_err());
        assert!(DiscreteMeasure::new(1, vec![2e6], vec![1.0], 0.0).is_err());
        assert!(DiscreteMeasure::new(2, vec![0.0, 1.0, 2.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn ball_mass_atom_inside_and_outside() {
        let inside = DiscreteMeasure::dirac(&[0.0, 0.0], 1.0).unwrap();
        let outside = DiscreteMeasure::dirac(&[1.0, 0.0], 1.0).unwrap();
        let b = Ball::new(vec![0.0, 0.0], 0.5).unwrap();
        assert_eq!(ball_mass(&inside, &b).unwrap(), 1.0);
        assert_eq!(ball_mass(&outside, &b).unwrap(), 0.0);
    }

    #[test]
    fn ball_mass_uniform_fraction() {
        let mu = uniform_line(1000);
        let b = Ball::new(vec![0.5], 0.25).unwrap();
        // direct count of midpoints in [0.25, 0.75]
        let count = (0..1000)
            .filter(|j| ((*j as f64 + 0.5) / 1000.0 - 0.5).abs() <= 0.25)
            .count();
        let m = ball_mass(&mu, &b).unwrap();
        assert!((m - count as f64 / 1000.0).abs() < 1e-12);
        assert!((m - 0.5).abs() < 0.01);
    }

    #[test]
    fn ball_mass_dimension_error() {
        let mu = uniform_line(4);
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_mass(&mu, &b).unwrap_err().code(), "dimension");
    }

    #[test]
    fn frostman_uniform_line() {
        let mu = uniform_line(4096);
        let radii: Vec<f64> = (3..=9).map(|k| 2f64.powi(-k)).collect();
        let est = frostman_exponent(&mu, &radii, &CenterPolicy::default()).unwrap();
        assert!((est.exponent - 1.0).abs() < 0.1, "{est:?}");
        // every sampled maximum sits under the fitted envelope
        for (r, m) in est.radii_used.iter().zip(&est.max_masses) {
            assert!(*m <= est.constant * r.powf(est.exponent) * (1.0 + est.max_violation) + 1e-15);
        }
    }

    #[test]
    fn frostman_single_atom() {
        let mu = DiscreteMeasure::dirac(&[0.3], 1.0).unwrap();
        let radii: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
        let est = frostman_exponent(&mu, &radii, &CenterPolicy::default()).unwrap();
        assert!(est.exponent.abs() < 0.05);
    }

    #[test]
    fn frostman_needs_three_radii() {
        let mu = uniform_line(16);
        let err = frostman_exponent(&mu, &[0.1, 0.2], &CenterPolicy::AllAtoms).unwrap_err();
        assert_eq!(err.code(), "insufficient_scales");
    }

    #[test]
    fn product_of_diracs() {
        let a = DiscreteMeasure::dirac(&[1.0], 2.0).unwrap();
        let b = DiscreteMeasure::dirac(&[-1.0], 3.0).unwrap();
        let p = product_measure(&a, &b).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.weights(), &[6.0]);
        assert_eq!(p.point(0), &[1.0, -1.0]);
    }

    #[test]
    fn product_of_two_point_sets() {
        let a = DiscreteMeasure::uniform(1, vec![0.0, 1.0], 1.0, 0.0).unwrap();
        let b = DiscreteMeasure::uniform(1, vec![0.0, 1.0, 0.5], 1.0, 0.0).unwrap();
        let p = product_measure(&a, &b).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.weights().iter().all(|w| (w - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn product_cap() {
        let a = uniform_line(100);
        let err = product_measure_capped(&a, &a, 9_999).unwrap_err();
        assert_eq!(err.code(), "product_too_large");
    }

    #[test]
    fn pushforward_identity_and_collapse() {
        let mu = uniform_line(10);
        assert_eq!(pushforward(&mu, |x| x.to_vec()).unwrap(), mu);
        let z = pushforward(&mu, |_| vec![0.0]).unwrap();
        assert!(z.points().all(|p| p == [0.0]));
        assert!((z.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_inconsistent_dimension() {
        let mu = uniform_line(4);
        let err = pushforward(&mu, |x| if x[0] < 0.5 { vec![0.0] } else { vec![0.0, 1.0] }).unwrap_err();
        assert_eq!(err.code(), "map_dimension");
    }

    #[test]
    fn linear_pushforward_matches_closure() {
        let mu = product_measure(&uniform_line(7), &uniform_line(5)).unwrap();
        let a = [1.0, -2.0];
        let lin = pushforward_linear(&mu, &a, 1).unwrap();
        let clo = pushforward(&mu, |x| vec![x[0] - 2.0 * x[1]]).unwrap();
        assert_eq!(lin, clo);
    }

    #[test]
    fn density_of_lebesgue_square() {
        let n = 200;
        let coords = (0..n * n)
            .flat_map(|k| {
                let (i, j) = (k / n, k % n);
                [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64]
            })
            .collect();
        let mu = DiscreteMeasure::uniform(2, coords, 1.0, 1.0 / n as f64).unwrap();
        let radii = [0.2, 0.1, 0.05];
        let d = lower_derivative_density(&mu, &[0.5, 0.5], &radii).unwrap();
        // oracle: ball_mass / (pi r^2) at each radius
        let oracle = radii
            .iter()
            .map(|&r| ball_mass(&mu, &Ball::new(vec![0.5, 0.5], r).unwrap()).unwrap() / (std::f64::consts::PI * r * r))
            .fold(f64::INFINITY, f64::min);
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 1.0).abs() < 0.1);
        let far = lower_derivative_density(&mu, &[5.0, 5.0], &radii).unwrap();
        assert_eq!(far, 0.0);
    }

    #[test]
    fn density_of_single_atom_is_finite_minimum() {
        let mu = DiscreteMeasure::dirac(&[0.0], 1.0).unwrap();
        let d = lower_derivative_density(&mu, &[0.0], &[0.5, 0.25]).unwrap();
        assert!((d - 1.0 / (2.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn density_refuses_below_resolution() {
        let mu = uniform_line(10);
        let err = lower_derivative_density(&mu, &[0.5], &[0.2, 0.05]).unwrap_err();
        assert_eq!(err.code(), "below_resolution");
    }

    #[test]
    fn unit_balls() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
