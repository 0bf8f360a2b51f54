//! Spherical, annular and ball averages of `|mu^|^2`, and the rotated
//! average `sigma_theta`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fourier::FourierTransform;
use super::quadrature::{gauss_legendre_on, resolve_nodes, sphere_rule, AngularNodes};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, ScalingFit};
use crate::measure::{check_dim, unit_ball_volume};
use crate::par;
use crate::rotation::RotationMeasure;

/// A value with an error estimate (standard error for Monte Carlo,
/// refinement difference for quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// Samples or quadrature nodes behind the value.
    pub samples: usize,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.stderr / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Spherical,
    Annulus,
    Cone,
    Directional,
}

/// Decay data: one averaged value per radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub kind: ProfileKind,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub quadrature_nodes: Vec<usize>,
}

impl SpectralProfile {
    pub fn new(kind: ProfileKind, radii: Vec<f64>, estimates: &[Estimate]) -> Result<Self> {
        if radii.len() != estimates.len() {
            return Err(Error::Dimension {
                expected: radii.len(),
                got: estimates.len(),
            });
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.iter().any(|&r| !(r > 1.0)) {
            return Err(Error::InvalidSpec("profile radii must increase and exceed 1".into()));
        }
        Ok(Self {
            kind,
            values: estimates.iter().map(|e| e.value.max(0.0)).collect(),
            stderr: estimates.iter().map(|e| e.stderr).collect(),
            quadrature_nodes: estimates.iter().map(|e| e.samples).collect(),
            radii,
        })
    }

    /// Log-log regression of value against radius.
    pub fn fit(&self) -> Result<ScalingFit> {
        loglog_fit(&self.radii, &self.values)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,value,stderr,nodes\n");
        for i in 0..self.radii.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.radii[i], self.values[i], self.stderr[i], self.quadrature_nodes[i]
            );
        }
        s
    }
}

fn check_spectral_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// `int_{S^{d-1}} |mu^(r v)|^2 dsigma(v)` without range checks; returns the
/// value and the number of directions used.
pub(crate) fn sphere_integral<F: FourierTransform + ?Sized>(
    mu: &F,
    r: f64,
    nodes: AngularNodes,
) -> Result<(f64, usize)> {
    let d = mu.ambient_dim();
    check_spectral_dim(d)?;
    let m = resolve_nodes(d, nodes, r, mu.extent())?;
    let rule = sphere_rule(d, m)?;
    let value = par::chunked_sum(rule.len(), |k| {
        let xi: Vec<f64> = rule.direction(k).iter().map(|v| v * r).collect();
        rule.weights[k] * mu.modulus_sq(&xi)
    });
    Ok((value, rule.node_count()))
}

/// `sigma(mu)(r)`: the integral of `|mu^|^2` over the sphere of radius `r`
/// against surface measure of the unit sphere.
pub fn spherical_average<F: FourierTransform + ?Sized>(mu: &F, r: f64, nodes: AngularNodes) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::BelowValidRange { value: r, min: 1.0 });
    }
    Ok(sphere_integral(mu, r, nodes)?.0)
}

/// Number of radii averaged by [`spherical_profile`] when smoothing.
pub const SMOOTHING_POINTS: usize = 8;

/// `sigma(mu)` at each radius. With `window = Some(w)` each value is the
/// mean of `sigma` over [`SMOOTHING_POINTS`] equally spaced radii in
/// `[r - w, r + w]`, which removes the oscillation that otherwise dominates
/// log-log fits; `stderr` holds the spread of those samples over their count.
pub fn spherical_profile<F: FourierTransform + ?Sized>(
    mu: &F,
    radii: &[f64],
    nodes: AngularNodes,
    window: Option<f64>,
) -> Result<SpectralProfile> {
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 1.0) {
            return Err(Error::BelowValidRange { value: r, min: 1.0 });
        }
        let e = match window {
            None => {
                let (v, m) = sphere_integral(mu, r, nodes)?;
                Estimate {
                    value: v,
                    stderr: 0.0,
                    samples: m,
                }
            }
            Some(w) => {
                let k = SMOOTHING_POINTS;
                let mut vals = Vec::with_capacity(k);
                let mut total = 0;
                for j in 0..k {
                    let rj = r - w + 2.0 * w * (j as f64 + 0.5) / k as f64;
                    let (v, m) = sphere_integral(mu, rj, nodes)?;
                    vals.push(v);
                    total += m;
                }
                let mean = vals.iter().sum::<f64>() / k as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
                Estimate {
                    value: mean,
                    stderr: (var / k as f64).sqrt(),
                    samples: total,
                }
            }
        };
        out.push(e);
    }
    SpectralProfile::new(ProfileKind::Spherical, radii.to_vec(), &out)
}

/// Gauss-Legendre panel count for a radial interval of length `len` over
/// which `|mu^|^2` oscillates with frequency up to the support diameter.
fn radial_panels(len: f64, diameter: f64) -> usize {
    (len * diameter.max(1e-3)).ceil().max(1.0) as usize
}

const PANEL_ORDER: usize = 8;

/// `int_a^b rho^{d-1} sigma(mu)(rho) drho` over `panels` equal panels.
fn radial_integral<F: FourierTransform + ?Sized>(mu: &F, a: f64, b: f64, panels: usize) -> Result<(f64, usize)> {
    let d = mu.ambient_dim();
    let h = (b - a) / panels as f64;
    let mut rule = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let (xs, ws) = gauss_legendre_on(PANEL_ORDER, a + p as f64 * h, a + (p + 1) as f64 * h);
        rule.extend(xs.into_iter().zip(ws));
    }
    let vals = par::map_slice(&rule, |&(x, _)| sphere_integral(mu, x, AngularNodes::Auto));
    let mut total = 0.0;
    let mut nodes = 0;
    for ((x, w), v) in rule.iter().zip(vals) {
        let (v, m) = v?;
        total += w * x.powi(d as i32 - 1) * v;
        nodes += m;
    }
    Ok((total, nodes))
}

/// `r^{1-d} int_{r - w < |x| < r + w} |mu^(x)|^2 dx` by radial Gauss-Legendre
/// times the sphere rule. The error estimate compares against half as many
/// radial panels; panels are doubled until it is below 5% of the value.
pub fn annulus_average<F: FourierTransform + ?Sized>(mu: &F, r: f64, width: f64) -> Result<Estimate> {
    if !(width > 0.0 && r > 1.0 + width) {
        return Err(Error::BelowValidRange { value: r, min: 1.0 + width });
    }
    let d = mu.ambient_dim() as i32;
    let (a, b) = (r - width, r + width);
    let mut panels = radial_panels(b - a, mu.diameter()).max(2);
    let scale = r.powi(1 - d);
    loop {
        let (coarse, _) = radial_integral(mu, a, b, panels / 2)?;
        let (fine, nodes) = radial_integral(mu, a, b, panels)?;
        let est = Estimate {
            value: scale * fine,
            stderr: scale * (fine - coarse).abs(),
            samples: nodes,
        };
        if est.relative_error() <= 0.05 || panels >= 1 << 12 {
            return Ok(est);
        }
        panels *= 2;
    }
}

/// Volume of `{r - w < |x| < r + w}` in `R^d`, times `r^{1-d}`: the annulus
/// average of a single unit atom.
pub fn annulus_volume_scaled(d: usize, r: f64, width: f64) -> f64 {
    unit_ball_volume(d) * ((r + width).powi(d as i32) - (r - width).powi(d as i32)) * r.powi(1 - d as i32)
}

/// `int_{|y| <= radius} |mu^(y)|^2 dy`.
pub fn ball_integral<F: FourierTransform + ?Sized>(mu: &F, radius: f64) -> Result<Estimate> {
    if !(radius > 0.0) {
        return Err(Error::DegenerateInput("radius must be positive".into()));
    }
    check_spectral_dim(mu.ambient_dim())?;
    let panels = radial_panels(radius, mu.diameter()).max(2);
    let (coarse, _) = radial_integral(mu, 0.0, radius, panels / 2)?;
    let (fine, nodes) = radial_integral(mu, 0.0, radius, panels)?;
    Ok(Estimate {
        value: fine,
        stderr: (fine - coarse).abs(),
        samples: nodes,
    })
}

/// `sigma_theta(nu)(xi) = int |nu^(g^{-1} xi)|^2 dtheta(g)` as a weighted
/// sample mean with its standard error.
pub fn sigma_theta<F: FourierTransform + ?Sized>(nu: &F, theta: &RotationMeasure, xi: &[f64]) -> Result<Estimate> {
    check_dim(theta.dim, nu.ambient_dim())?;
    check_dim(theta.dim, xi.len())?;
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(r > 1.0) {
        return Err(Error::BelowValidRange { value: r, min: 1.0 });
    }
    let vals = par::map_slice(&theta.samples, |g| nu.modulus_sq(&g.apply_inverse(xi)));
    Ok(weighted_mean(&vals, &theta.weights))
}

pub(crate) fn weighted_mean(vals: &[f64], weights: &[f64]) -> Estimate {
    let wsum: f64 = weights.iter().sum();
    let mean = vals.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let var = vals.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / wsum;
    let w2: f64 = weights.iter().map(|w| w * w).sum();
    // Kish effective sample size
    let n_eff = wsum * wsum / w2;
    Estimate {
        value: mean,
        stderr: (var / n_eff).sqrt(),
        samples: vals.len(),
    }
}
