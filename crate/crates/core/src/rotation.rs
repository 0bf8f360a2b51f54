//! The orthogonal groups O(1), O(2), O(3): Haar sampling, sample-cloud
//! measures on subgroups, the maps `S_g` and `pi_t`, and the concentration
//! audit for `theta({g : |x - g z| < r})`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::check_dim;
use crate::par;

pub const ORTHO_TOL: f64 = 1e-12;

/// An element of O(n), stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    dim: usize,
    matrix: Vec<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1.0;
        }
        Self { dim: n, matrix }
    }

    /// Validates `g^T g = I` entrywise to [`ORTHO_TOL`].
    pub fn from_matrix(n: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: matrix.len(),
            });
        }
        let g = Self { dim: n, matrix };
        let err = g.orthogonality_error();
        if !(err <= ORTHO_TOL) {
            return Err(Error::InvalidMeasure(format!(
                "matrix is not orthogonal (max |g^T g - I| = {err:e})"
            )));
        }
        Ok(g)
    }

    /// Rotation by `phi` in the plane.
    pub fn planar(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            dim: 2,
            matrix: vec![c, -s, s, c],
        }
    }

    /// `diag(signs)`.
    pub fn diagonal(signs: &[f64]) -> Result<Self> {
        let n = signs.len();
        let mut matrix = vec![0.0; n * n];
        for (i, &s) in signs.iter().enumerate() {
            matrix[i * n + i] = s;
        }
        Self::from_matrix(n, matrix)
    }

    /// `diag(g, 1)`: the copy of O(n) fixing the last axis of R^{n+1}.
    pub fn block_extend(&self) -> Self {
        let n = self.dim;
        let m = n + 1;
        let mut matrix = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                matrix[i * m + j] = self.matrix[i * n + j];
            }
        }
        matrix[m * m - 1] = 1.0;
        Self { dim: m, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.entry(k, i) * self.entry(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        match self.dim {
            1 => m[0],
            2 => m[0] * m[3] - m[1] * m[2],
            _ => {
                m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                    + m[2] * (m[3] * m[7] - m[4] * m[6])
            }
        }
    }

    /// `g y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|k| self.matrix[i * n + k] * y[k]).sum())
            .collect()
    }

    /// `g^{-1} y = g^T y`.
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|k| self.matrix[k * n + i] * y[k]).sum())
            .collect()
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim;
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = self.matrix[j * n + i];
            }
        }
        Self { dim: n, matrix }
    }

    /// `self * other`.
    pub fn compose(&self, other: &Rotation) -> Self {
        let n = self.dim;
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = (0..n).map(|k| self.entry(i, k) * other.entry(k, j)).sum();
            }
        }
        Self { dim: n, matrix }
    }

    /// Operator-norm distance `||g - h||`.
    pub fn distance(&self, other: &Rotation) -> f64 {
        let n = self.dim;
        let d: Vec<f64> = self.matrix.iter().zip(&other.matrix).map(|(a, b)| a - b).collect();
        // largest eigenvalue of D^T D by power iteration from each axis
        let mut best = 0.0f64;
        for start in 0..n {
            let mut v = vec![0.0; n];
            v[start] = 1.0;
            let mut lambda = 0.0;
            for _ in 0..200 {
                let dv: Vec<f64> = (0..n).map(|i| (0..n).map(|k| d[i * n + k] * v[k]).sum()).collect();
                let w: Vec<f64> = (0..n).map(|i| (0..n).map(|k| d[k * n + i] * dv[k]).sum()).collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    break;
                }
                lambda = norm;
                v = w.into_iter().map(|x| x / norm).collect();
            }
            best = best.max(lambda);
        }
        best.sqrt()
    }
}

fn check_n(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// One Haar-distributed element of O(n).
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Rotation> {
    check_n(n)?;
    Ok(match n {
        1 => Rotation {
            dim: 1,
            matrix: vec![if rng.random_bool(0.5) { 1.0 } else { -1.0 }],
        },
        2 => {
            let phi = 2.0 * PI * rng.random::<f64>();
            let g = Rotation::planar(phi);
            if rng.random_bool(0.5) {
                // g * diag(1, -1)
                let m = g.matrix;
                Rotation {
                    dim: 2,
                    matrix: vec![m[0], -m[1], m[2], -m[3]],
                }
            } else {
                g
            }
        }
        _ => {
            let a: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
            gram_schmidt3(&a)
        }
    })
}

/// Q factor of `a` (row-major 3x3) with positive diagonal in R, which makes
/// Q exactly Haar when `a` has iid Gaussian entries.
fn gram_schmidt3(a: &[f64]) -> Rotation {
    let mut cols: [[f64; 3]; 3] = [[0.0; 3]; 3];
    for j in 0..3 {
        for i in 0..3 {
            cols[j][i] = a[i * 3 + j];
        }
    }
    for j in 0..3 {
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..3).map(|i| cols[j][i] * cols[k][i]).sum();
                for i in 0..3 {
                    cols[j][i] -= dot * cols[k][i];
                }
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..3 {
            cols[j][i] /= norm;
        }
    }
    let mut matrix = vec![0.0; 9];
    for j in 0..3 {
        for i in 0..3 {
            matrix[i * 3 + j] = cols[j][i];
        }
    }
    Rotation { dim: 3, matrix }
}

/// `count` Haar samples; sample `i` comes from its own ChaCha stream so the
/// batch is the same however it is split across threads.
pub fn haar_batch(n: usize, count: usize, seed: u64) -> Result<Vec<Rotation>> {
    check_n(n)?;
    Ok(par::map_indexed(count, |i| {
        let mut rng = indexed_rng(seed, i);
        haar_sample(n, &mut rng).expect("dimension checked")
    }))
}

pub(crate) fn indexed_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// A probability measure on O(n) given by weighted samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationMeasure {
    pub dim: usize,
    pub samples: Vec<Rotation>,
    pub weights: Vec<f64>,
    /// Frostman exponent on O(n) with respect to the operator-norm metric.
    pub alpha: f64,
    /// `alpha - (n-1)(n-2)/2`.
    pub beta: f64,
}

impl RotationMeasure {
    pub fn new(samples: Vec<Rotation>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        let dim = samples.first().map(Rotation::dim).ok_or(Error::EmptySet)?;
        if weights.len() != samples.len() {
            return Err(Error::Dimension {
                expected: samples.len(),
                got: weights.len(),
            });
        }
        if samples.iter().any(|g| g.dim != dim) {
            return Err(Error::InvalidMeasure("mixed group dimensions".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure("negative or non-finite weight".into()));
        }
        let n = dim as f64;
        let beta = alpha - (n - 1.0) * (n - 2.0) / 2.0;
        if beta > n - 1.0 + 1e-12 {
            return Err(Error::InvalidMeasure(format!("beta {beta} exceeds n - 1")));
        }
        Ok(Self {
            dim,
            samples,
            weights,
            alpha,
            beta,
        })
    }

    fn uniform(samples: Vec<Rotation>, alpha: f64) -> Result<Self> {
        let w = 1.0 / samples.len().max(1) as f64;
        let weights = vec![w; samples.len()];
        Self::new(samples, weights, alpha)
    }

    /// Empirical Haar measure `theta_n` from `count` samples.
    pub fn haar(n: usize, count: usize, seed: u64) -> Result<Self> {
        let alpha = (n * (n - 1)) as f64 / 2.0;
        Self::uniform(haar_batch(n, count, seed)?, alpha)
    }

    /// Haar measure of the copy of O(2) in O(3) acting on the first two axes.
    pub fn planar_subgroup_of_o3(count: usize, seed: u64) -> Result<Self> {
        let samples = haar_batch(2, count, seed)?
            .iter()
            .map(Rotation::block_extend)
            .collect();
        Self::uniform(samples, 1.0)
    }

    /// Haar measure of `O(1) x {id}` inside O(2): `diag(+-1, 1)`.
    pub fn reflection_subgroup_of_o2(count: usize, seed: u64) -> Result<Self> {
        let samples = haar_batch(1, count, seed)?
            .iter()
            .map(Rotation::block_extend)
            .collect();
        Self::uniform(samples, 0.0)
    }

    pub fn dirac(g: Rotation) -> Result<Self> {
        Self::new(vec![g], vec![1.0], 0.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        crate::measure::compensated_sum(self.weights.iter().copied())
    }

    /// One row per sample: the `n^2` matrix entries followed by the weight.
    pub fn to_table_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# dim samples alpha beta");
        let _ = writeln!(s, "{} {} {} {}", self.dim, self.len(), self.alpha, self.beta);
        let mut head = String::from("#");
        for i in 1..=self.dim {
            for j in 1..=self.dim {
                let _ = write!(head, " g_{i}{j}");
            }
        }
        let _ = writeln!(s, "{head} w");
        for (g, w) in self.samples.iter().zip(&self.weights) {
            for x in &g.matrix {
                let _ = write!(s, "{x} ");
            }
            let _ = writeln!(s, "{w}");
        }
        s
    }

    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<&str> = rows
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))?
            .split_whitespace()
            .collect();
        if header.len() != 4 {
            return Err(Error::Parse("header needs dim, samples, alpha, beta".into()));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t}: {e}")));
        let dim: usize = header[0].parse().map_err(|_| Error::Parse("bad dim".into()))?;
        let alpha = num(header[2])?;
        let mut samples = Vec::new();
        let mut weights = Vec::new();
        for row in rows {
            let vals: Vec<f64> = row.split_whitespace().map(num).collect::<Result<_>>()?;
            if vals.len() != dim * dim + 1 {
                return Err(Error::Parse(format!("expected {} columns", dim * dim + 1)));
            }
            weights.push(vals[dim * dim]);
            samples.push(Rotation::from_matrix(dim, vals[..dim * dim].to_vec())?);
        }
        Self::new(samples, weights, alpha)
    }
}

/// `S_g(x, y) = x - g y`.
pub fn apply_s(g: &Rotation, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dim(g.dim, x.len())?;
    check_dim(g.dim, y.len())?;
    Ok(g.apply(y).iter().zip(x).map(|(gy, xi)| xi - gy).collect())
}

/// `pi_t(x, y) = x - t y`.
pub fn apply_pi(t: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dim(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a - t * b).collect())
}

/// Orthonormal frame of `R^{2n}` adapted to `S_g`: `vectors_u` span the
/// orthogonal complement of the kernel and `vectors_kernel` span the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBasis {
    pub g: Rotation,
    pub vectors_u: Vec<Vec<f64>>,
    pub vectors_kernel: Vec<Vec<f64>>,
}

pub fn plane_basis(g: &Rotation) -> PlaneBasis {
    let n = g.dim;
    let mut vectors_u = Vec::with_capacity(n);
    let mut vectors_kernel = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let back = g.apply_inverse(&e);
        let mut u = vec![0.0; 2 * n];
        let mut k = vec![0.0; 2 * n];
        u[i] = FRAC_1_SQRT_2;
        k[i] = FRAC_1_SQRT_2;
        for j in 0..n {
            u[n + j] = -FRAC_1_SQRT_2 * back[j];
            k[n + j] = FRAC_1_SQRT_2 * back[j];
        }
        vectors_u.push(u);
        vectors_kernel.push(k);
    }
    PlaneBasis {
        g: g.clone(),
        vectors_u,
        vectors_kernel,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub r: f64,
    pub measured: f64,
    pub bound: f64,
}

impl AuditRow {
    /// `measured / bound`, or 0 when nothing was measured.
    pub fn ratio(&self) -> f64 {
        if self.measured == 0.0 {
            0.0
        } else {
            self.measured / self.bound
        }
    }
}

/// Mass of `{g : |x - g z| < r}` under `theta` next to
/// `min((r/|z|)^beta, (r/|x|)^beta)`, for each radius.
pub fn concentration_audit(
    theta: &RotationMeasure,
    x: &[f64],
    z: &[f64],
    radii: &[f64],
) -> Result<Vec<AuditRow>> {
    check_dim(theta.dim, x.len())?;
    check_dim(theta.dim, z.len())?;
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nz = z.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || nz == 0.0 {
        return Err(Error::DegenerateInput("x and z must be nonzero".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::DegenerateInput("radii must be positive".into()));
    }
    let dists: Vec<f64> = par::map_slice(&theta.samples, |g| {
        g.apply(z)
            .iter()
            .zip(x)
            .map(|(gz, xi)| (xi - gz) * (xi - gz))
            .sum::<f64>()
            .sqrt()
    });
    let total = theta.total_weight();
    Ok(radii
        .iter()
        .map(|&r| {
            let hit = crate::measure::compensated_sum(
                dists.iter().zip(&theta.weights).filter(|(d, _)| **d < r).map(|(_, w)| *w),
            );
            let bound = (r / nz).powf(theta.beta).min((r / nx).powf(theta.beta));
            AuditRow {
                r,
                measured: hit / total,
                bound,
            }
        })
        .collect())
}

/// Exact Haar probability of `|x - g z| < r` on O(2) or O(3).
pub fn haar_ball_probability(n: usize, x: &[f64], z: &[f64], r: f64) -> Result<f64> {
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nz = z.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || nz == 0.0 {
        return Err(Error::DegenerateInput("x and z must be nonzero".into()));
    }
    // |x - g z| < r  <=>  cos(angle(x, g z)) > c
    let c = (nx * nx + nz * nz - r * r) / (2.0 * nx * nz);
    if c >= 1.0 {
        return Ok(0.0);
    }
    if c < -1.0 {
        return Ok(1.0);
    }
    match n {
        2 => Ok(c.acos() / PI),
        3 => Ok((1.0 - c) / 2.0),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn s_and_pi_examples() {
        let id = Rotation::identity(2);
        assert_eq!(apply_s(&id, &[0.3, 0.4], &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
        let rot = Rotation::planar(PI);
        assert!(close(&apply_s(&rot, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), &[2.0, 0.0], 1e-15));
        let refl = Rotation::diagonal(&[1.0, -1.0]).unwrap();
        assert_eq!(apply_s(&refl, &[0.0, 0.0], &[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(apply_pi(0.0, &[1.0, 2.0], &[5.0, 6.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(apply_pi(1.0, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(apply_pi(2.0, &[1.0, 1.0], &[1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(apply_s(&id, &[1.0], &[1.0, 2.0]).unwrap_err().code(), "dimension");
    }

    #[test]
    fn unsupported_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(haar_sample(4, &mut rng).unwrap_err().code(), "unsupported_dimension");
        assert_eq!(haar_sample(0, &mut rng).unwrap_err().code(), "unsupported_dimension");
    }

    #[test]
    fn samples_are_orthogonal_with_both_determinants() {
        for n in 1..=3 {
            let batch = haar_batch(n, 2000, 9).unwrap();
            let mut neg = 0;
            for g in &batch {
                assert!(g.orthogonality_error() <= ORTHO_TOL, "n={n}");
                if g.determinant() < 0.0 {
                    neg += 1;
                }
            }
            assert!((800..1200).contains(&neg), "n={n} reflections={neg}");
        }
    }

    #[test]
    fn batch_is_deterministic() {
        assert_eq!(haar_batch(3, 50, 4).unwrap(), haar_batch(3, 50, 4).unwrap());
        assert_ne!(haar_batch(3, 50, 4).unwrap(), haar_batch(3, 50, 5).unwrap());
    }

    #[test]
    fn plane_basis_of_identity() {
        let b = plane_basis(&Rotation::identity(2));
        let s = FRAC_1_SQRT_2;
        assert!(close(&b.vectors_u[0], &[s, 0.0, -s, 0.0], 1e-15));
    }

    #[test]
    fn plane_basis_frame() {
        for g in haar_batch(3, 20, 2).unwrap() {
            let b = plane_basis(&g);
            let all: Vec<&Vec<f64>> = b.vectors_u.iter().chain(&b.vectors_kernel).collect();
            for (i, a) in all.iter().enumerate() {
                for (j, c) in all.iter().enumerate() {
                    let dot: f64 = a.iter().zip(c.iter()).map(|(p, q)| p * q).sum();
                    assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
            for (i, u) in b.vectors_u.iter().enumerate() {
                let img = apply_s(&g, &u[..3], &u[3..]).unwrap();
                let mut e = vec![0.0; 3];
                e[i] = 1.0;
                assert!(close(&img.iter().map(|v| v * FRAC_1_SQRT_2).collect::<Vec<_>>(), &e, 1e-12));
            }
            for k in &b.vectors_kernel {
                assert!(apply_s(&g, &k[..3], &k[3..]).unwrap().iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn audit_small_examples() {
        let theta = RotationMeasure::haar(2, 100_000, 11).unwrap();
        assert_eq!(theta.beta, 1.0);
        let rows = concentration_audit(&theta, &[1.0, 0.0], &[0.0, 1.0], &[2.1]).unwrap();
        assert_eq!(rows[0].measured, 1.0);
        assert!(rows[0].bound >= 1.0);
        // arc of half-angle asin(0.05) on each of the two cosets
        let rows = concentration_audit(&theta, &[1.0, 0.0], &[1.0, 0.0], &[0.1]).unwrap();
        let oracle = 2.0 * (0.05f64).asin() / PI;
        assert!((rows[0].measured - oracle).abs() < 0.005, "{}", rows[0].measured);
        let rows = concentration_audit(&theta, &[2.0, 0.0], &[0.0, 1.0], &[0.5]).unwrap();
        assert_eq!(rows[0].measured, 0.0);
        assert_eq!(
            concentration_audit(&theta, &[0.0, 0.0], &[0.0, 1.0], &[0.5]).unwrap_err().code(),
            "degenerate_input"
        );
    }

    #[test]
    fn subgroup_exponents() {
        let h = RotationMeasure::haar(3, 10, 0).unwrap();
        assert_eq!((h.alpha, h.beta), (3.0, 2.0));
        let p = RotationMeasure::planar_subgroup_of_o3(10, 0).unwrap();
        assert_eq!(p.beta, 0.0);
        assert!(p.samples.iter().all(|g| g.entry(2, 2) == 1.0));
        let r = RotationMeasure::reflection_subgroup_of_o2(10, 0).unwrap();
        assert_eq!((r.alpha, r.beta), (0.0, 0.0));
    }

    #[test]
    fn operator_distance() {
        let a = Rotation::planar(0.0);
        let b = Rotation::planar(PI);
        assert!((a.distance(&b) - 2.0).abs() < 1e-12);
        let c = Rotation::planar(0.1);
        assert!((a.distance(&c) - 2.0 * (0.05f64).sin()).abs() < 1e-12);
    }

    #[test]
    fn table_round_trip() {
        let m = RotationMeasure::haar(3, 7, 3).unwrap();
        let back = RotationMeasure::from_table_str(&m.to_table_string()).unwrap();
        assert_eq!(m, back);
    }
}
