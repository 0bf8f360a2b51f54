//! Decay integrals over frequency pairs `(xi, eta)` in `R^n x R^n`:
//! the rotated annulus integral and the cone average.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::averages::{sphere_integral, Estimate};
use super::fourier::FourierTransform;
use super::quadrature::{gauss_legendre_on, resolve_nodes, sphere_rule, AngularNodes, SphereRule};
use crate::error::{Error, Result};
use crate::measure::{unit_ball_volume, unit_sphere_area};
use crate::par;
use crate::rotation::{indexed_rng, RotationMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub seed: u64,
    /// Samples drawn per round.
    pub batch: usize,
    pub max_samples: usize,
    /// Stop once the standard error is below this fraction of the value.
    pub target_rel_se: f64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            batch: 4096,
            max_samples: 1 << 21,
            target_rel_se: 0.1,
        }
    }
}

fn half_dim(mu_dim: usize) -> Result<usize> {
    match mu_dim {
        4 => Ok(2),
        6 => Ok(3),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// `int int_{R <= |xi| <= 2R} |mu^(xi, -g^{-1} xi)|^2 dxi dtheta(g)`.
///
/// Monte Carlo with `xi` uniform in the annulus and `g ~ theta`; the value is
/// the annulus volume times the sample mean. Sample `k` draws from its own
/// counter-based stream, and rounds continue until the relative standard
/// error reaches `mc.target_rel_se` or `mc.max_samples` is spent.
pub fn directional_decay<F: FourierTransform + ?Sized>(
    mu: &F,
    theta: &RotationMeasure,
    r: f64,
    mc: &MonteCarloSpec,
) -> Result<Estimate> {
    let n = half_dim(mu.ambient_dim())?;
    if theta.dim != n {
        return Err(Error::Dimension {
            expected: n,
            got: theta.dim,
        });
    }
    if !(r > 1.0) {
        return Err(Error::BelowValidRange { value: r, min: 1.0 });
    }
    let pick = WeightedIndex::new(&theta.weights)
        .map_err(|e| Error::InvalidMeasure(format!("rotation weights: {e}")))?;
    let (lo, hi) = (r.powi(n as i32), (2.0 * r).powi(n as i32));
    let volume = unit_ball_volume(n) * (hi - lo);
    let sample = |k: usize| -> f64 {
        let mut rng = indexed_rng(mc.seed, k);
        let g = &theta.samples[pick.sample(&mut rng)];
        let mut dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rho = (lo + rng.random::<f64>() * (hi - lo)).powf(1.0 / n as f64);
        for x in &mut dir {
            *x *= rho / norm;
        }
        let back = g.apply_inverse(&dir);
        let mut xi = dir;
        xi.extend(back.into_iter().map(|x| -x));
        mu.modulus_sq(&xi)
    };
    let batch = mc.batch.max(16);
    let (mut sum, mut sumsq, mut count) = (0.0, 0.0, 0usize);
    loop {
        let vals = par::map_indexed(batch, |i| sample(count + i));
        for v in vals {
            sum += v;
            sumsq += v * v;
        }
        count += batch;
        let mean = sum / count as f64;
        let var = (sumsq / count as f64 - mean * mean).max(0.0) * count as f64 / (count - 1) as f64;
        let est = Estimate {
            value: volume * mean,
            stderr: volume * (var / count as f64).sqrt(),
            samples: count,
        };
        if est.relative_error() <= mc.target_rel_se || count + batch > mc.max_samples {
            return Ok(est);
        }
    }
}

/// Total mass of the cone measure `gamma` on
/// `{(x, y) : 1 <= |x| = |y| <= 2}` in `R^n x R^n`.
pub fn cone_mass(n: usize) -> f64 {
    unit_sphere_area(n) * (2f64.powi(n as i32) - 1.0) / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeNodes {
    #[serde(default)]
    pub radial_panels: Option<usize>,
    #[serde(default)]
    pub angular: AngularNodes,
}

/// Expand an antipodally folded rule into a full one.
fn unfold(rule: &SphereRule) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut dirs = Vec::new();
    let mut weights = Vec::new();
    for k in 0..rule.len() {
        let v = rule.direction(k).to_vec();
        if rule.antipodal {
            dirs.push(v.iter().map(|x| -x).collect());
            weights.push(rule.weights[k] / 2.0);
            weights.push(rule.weights[k] / 2.0);
        } else {
            weights.push(rule.weights[k]);
        }
        dirs.push(v);
    }
    (dirs, weights)
}

/// `int_Gamma |mu^(R x, R y)|^2 dgamma(x, y)` with
/// `dgamma = dsigma(u) dsigma(v) t^{n-1} dt / |S^{n-1}|` for `x = t u`,
/// `y = t v`. With this normalization the Haar rotated annulus integral
/// equals `R^n` times the cone average.
///
/// Products split across the two `R^n` factors are integrated as
/// `sigma(a)(R t) sigma(b)(R t)`; anything else uses a product sphere rule.
/// The error estimate compares against half as many radial panels.
pub fn cone_average<F: FourierTransform + ?Sized>(mu: &F, r: f64, nodes: &ConeNodes) -> Result<Estimate> {
    let n = half_dim(mu.ambient_dim())?;
    if !(r > 1.0) {
        return Err(Error::BelowValidRange { value: r, min: 1.0 });
    }
    let split = mu.split_at(n);
    let extent = mu.extent();
    let inner = |t: f64| -> Result<(f64, usize)> {
        let rho = r * t;
        match &split {
            Some((a, b)) => {
                let (va, ma) = sphere_integral(a.as_ref(), rho, nodes.angular)?;
                let (vb, mb) = sphere_integral(b.as_ref(), rho, nodes.angular)?;
                Ok((va * vb, ma + mb))
            }
            None => {
                let m = resolve_nodes(n, nodes.angular, rho, extent)?;
                let ru = sphere_rule(n, m)?;
                let (vdirs, vw) = unfold(&sphere_rule(n, m)?);
                let total = par::chunked_sum(ru.len(), |k| {
                    let u = ru.direction(k);
                    let mut xi = vec![0.0; 2 * n];
                    let mut acc = 0.0;
                    for (v, w) in vdirs.iter().zip(&vw) {
                        for i in 0..n {
                            xi[i] = rho * u[i];
                            xi[n + i] = rho * v[i];
                        }
                        acc += w * mu.modulus_sq(&xi);
                    }
                    ru.weights[k] * acc
                });
                Ok((total, ru.node_count() * vdirs.len()))
            }
        }
    };
    let area = unit_sphere_area(n);
    let integrate = |panels: usize| -> Result<(f64, usize)> {
        let mut rule = Vec::new();
        let h = 1.0 / panels as f64;
        for p in 0..panels {
            let (xs, ws) = gauss_legendre_on(8, 1.0 + p as f64 * h, 1.0 + (p + 1) as f64 * h);
            rule.extend(xs.into_iter().zip(ws));
        }
        let vals = par::map_slice(&rule, |&(t, _)| inner(t));
        let mut total = 0.0;
        let mut count = 0;
        for ((t, w), v) in rule.iter().zip(vals) {
            let (v, m) = v?;
            total += w * t.powi(n as i32 - 1) * v;
            count += m;
        }
        Ok((total / area, count))
    };
    let panels = nodes
        .radial_panels
        .unwrap_or_else(|| ((r * 2.0 * extent).ceil() as usize).max(2));
    let (fine, count) = integrate(panels)?;
    let (coarse, _) = integrate((panels / 2).max(1))?;
    Ok(Estimate {
        value: fine,
        stderr: (fine - coarse).abs(),
        samples: count,
    })
}
