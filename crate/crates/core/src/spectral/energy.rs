//! Riesz energies `I_s(mu) = sum |x - y|^{-s} dmu dmu`, directly and as the
//! weighted frequency integral `c(d, s) int |mu^(xi)|^2 |xi|^{s-d} dxi`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::averages::sphere_integral;
use super::fourier::Mollified;
use super::quadrature::{gauss_legendre_on, AngularNodes};
use crate::error::{Error, Result};
use crate::measure::{dist2, DiscreteMeasure};
use crate::par;

/// `pi^{s - d/2} Gamma((d - s)/2) / Gamma(s/2)`: the transform of
/// `|x|^{-s}` is this constant times `|xi|^{s-d}` under the
/// `exp(-2 pi i x . xi)` convention.
pub fn riesz_constant(d: usize, s: f64) -> f64 {
    let d = d as f64;
    std::f64::consts::PI.powf(s - d / 2.0) * gamma((d - s) / 2.0) / gamma(s / 2.0)
}

fn check_exponent(d: usize, s: f64) -> Result<()> {
    if s > 0.0 && s < d as f64 {
        Ok(())
    } else {
        Err(Error::DegenerateInput(format!("energy exponent {s} outside (0, {d})")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialEnergy {
    pub value: f64,
    /// Off-diagonal pairs closer than the resolution floor, evaluated at the
    /// floor distance instead.
    pub clamped_pairs: u64,
    /// Set when two distinct atoms coincide and there is no floor to clamp to.
    pub infinite: bool,
}

/// `sum_{i != j} w_i w_j |x_i - x_j|^{-s}`.
pub fn riesz_energy_spatial(mu: &DiscreteMeasure, s: f64) -> Result<SpatialEnergy> {
    let d = mu.ambient_dim();
    check_exponent(d, s)?;
    let n = mu.len();
    let floor2 = mu.resolution().powi(2);
    let clamps: Vec<u64> = par::map_indexed(n, |i| {
        let xi = mu.point(i);
        (0..n)
            .filter(|&j| j != i && dist2(xi, mu.point(j)) < floor2)
            .count() as u64
    });
    let clamped_pairs = clamps.iter().sum::<u64>() / 2;
    let coincident = mu.resolution() == 0.0
        && (0..n).any(|i| (i + 1..n).any(|j| dist2(mu.point(i), mu.point(j)) == 0.0));
    if coincident {
        return Ok(SpatialEnergy {
            value: f64::INFINITY,
            clamped_pairs,
            infinite: true,
        });
    }
    let w = mu.weights();
    let value = par::chunked_sum(n, |i| {
        let xi = mu.point(i);
        let mut acc = 0.0;
        for j in 0..n {
            if j != i {
                let r2 = dist2(xi, mu.point(j)).max(floor2);
                acc += w[j] * r2.powf(-0.5 * s);
            }
        }
        w[i] * acc
    });
    Ok(SpatialEnergy {
        value,
        clamped_pairs,
        infinite: false,
    })
}

/// `E |x + sigma G|^{-s}` for standard Gaussian `G` in `R^d`, as a function
/// of `r = |x|`. This is the Riesz kernel seen by two atoms after each is
/// smoothed by a Gaussian of width `h`, with `sigma = sqrt(2) h`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedRieszKernel {
    s: f64,
    a: f64,
    b: f64,
    sigma: f64,
    at_zero: f64,
}

impl SmoothedRieszKernel {
    /// Switch from the convergent series to the asymptotic expansion.
    const Z_SWITCH: f64 = 32.0;

    pub fn new(d: usize, s: f64, h: f64) -> Self {
        let sigma = std::f64::consts::SQRT_2 * h;
        let (a, b) = (s / 2.0, d as f64 / 2.0);
        let at_zero = sigma.powf(-s) * 2f64.powf(-a) * gamma(b - a) / gamma(b);
        Self { s, a, b, sigma, at_zero }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let z = r * r / (2.0 * self.sigma * self.sigma);
        if z <= Self::Z_SWITCH {
            // M(a, b, -z) = e^{-z} M(b - a, b, z), a series of positive terms
            let alpha = self.b - self.a;
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut k = 0.0;
            loop {
                term *= (alpha + k) / (self.b + k) * z / (k + 1.0);
                sum += term;
                k += 1.0;
                if (term < 1e-17 * sum && k > z) || k > 1000.0 {
                    break;
                }
            }
            self.at_zero * (-z).exp() * sum
        } else {
            // sum_k (a)_k (a - b + 1)_k / (k! z^k), cut at the smallest term
            let c = self.a - self.b + 1.0;
            let mut term = 1.0f64;
            let mut sum = 1.0;
            let mut k = 0.0;
            while k < 40.0 {
                let next = term * (self.a + k) * (c + k) / ((k + 1.0) * z);
                if next.abs() >= term.abs() {
                    break;
                }
                if next.abs() < 1e-17 {
                    sum += next;
                    break;
                }
                sum += next;
                term = next;
                k += 1.0;
            }
            r.powf(-self.s) * sum
        }
    }
}

/// Energy of `mu` convolved with a Gaussian of width `h`, diagonal included.
pub fn mollified_energy_spatial(mu: &DiscreteMeasure, s: f64, h: f64) -> Result<f64> {
    let d = mu.ambient_dim();
    check_exponent(d, s)?;
    if !(h > 0.0) {
        return Err(Error::DegenerateInput("mollification width must be positive".into()));
    }
    let k = SmoothedRieszKernel::new(d, s, h);
    let w = mu.weights();
    Ok(par::chunked_sum(mu.len(), |i| {
        let xi = mu.point(i);
        let acc: f64 = (0..mu.len())
            .map(|j| w[j] * k.eval(dist2(xi, mu.point(j)).sqrt()))
            .sum();
        w[i] * acc
    }))
}

/// Frequency-side settings for [`riesz_energy_fourier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyQuadrature {
    /// Upper cutoff; defaults to `1 / resolution`.
    #[serde(default)]
    pub xi_max: Option<f64>,
    /// Gaussian width; defaults to the resolution. Zero disables smoothing.
    #[serde(default)]
    pub mollification: Option<f64>,
    #[serde(default)]
    pub angular: AngularNodes,
}

impl Default for FrequencyQuadrature {
    fn default() -> Self {
        Self {
            xi_max: None,
            mollification: None,
            angular: AngularNodes::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub s: f64,
    /// Double sum for the smoothed measure (the same measure the frequency
    /// side sees).
    pub spatial_value: f64,
    pub fourier_value: f64,
    pub constant_used: f64,
    pub relative_gap: f64,
    pub mollification_width: f64,
    /// Cutoff actually used, rounded up to a panel boundary.
    pub xi_max: f64,
    pub tail_estimate: f64,
    pub radial_nodes: usize,
    /// Off-diagonal double sum of the unsmoothed atoms, for reference.
    pub atomic_spatial_value: f64,
    pub clamped_pairs: u64,
}

const FIRST_PANEL_ORDER: usize = 16;
const PANEL_ORDER: usize = 8;

/// Both sides of the Parseval identity for the Riesz energy.
///
/// The radial integrand `rho^{s-1} sigma(rho)` is integrated with a
/// substitution `rho = xi_0 t^{1/s}` on the first panel, which absorbs the
/// singularity at the origin, then Gauss-Legendre panels of width
/// `1 / diameter`. Panel boundaries do not depend on the cutoff, so the
/// result is nondecreasing in `xi_max`. The tail beyond the cutoff is
/// extrapolated from the decay of the last two octaves.
pub fn riesz_energy_fourier(mu: &DiscreteMeasure, s: f64, quad: &FrequencyQuadrature) -> Result<EnergyReport> {
    let d = mu.ambient_dim();
    check_exponent(d, s)?;
    let res = mu.resolution();
    let h = quad.mollification.unwrap_or(res);
    let xi_req = match quad.xi_max {
        Some(x) => x,
        None if res > 0.0 => 1.0 / res,
        None => return Err(Error::InvalidSpec("xi_max needed for a measure without resolution".into())),
    };
    if res > 0.0 && xi_req < 1.0 / res * (1.0 - 1e-12) {
        return Err(Error::InvalidSpec(format!("xi_max {xi_req} below 1/resolution {}", 1.0 / res)));
    }
    let smooth = Mollified::new(mu.clone(), h);
    let diam = (2.0 * super::fourier::FourierTransform::extent(mu)).max(h).max(1e-9);
    let width = 1.0 / diam;
    let panels = ((xi_req - width) / width).ceil().max(0.0) as usize;
    let xi_max = width * (panels + 1) as f64;

    let sigma = |rho: f64| sphere_integral(&smooth, rho, quad.angular).map(|v| v.0);

    let (t, tw) = gauss_legendre_on(FIRST_PANEL_ORDER, 0.0, 1.0);
    let first_nodes: Vec<f64> = t.iter().map(|t| width * t.powf(1.0 / s)).collect();
    let first_vals = par::map_slice(&first_nodes, |&r| sigma(r));
    let mut first = 0.0;
    for (v, w) in first_vals.into_iter().zip(&tw) {
        first += w * v?;
    }
    first *= width.powf(s) / s;

    let (x8, w8) = gauss_legendre_on(PANEL_ORDER, 0.0, width);
    let panel_vals = par::map_indexed(panels, |p| -> Result<f64> {
        let a = width * (p + 1) as f64;
        let mut acc = 0.0;
        for (x, w) in x8.iter().zip(&w8) {
            let rho = a + x;
            acc += w * rho.powf(s - 1.0) * sigma(rho)?;
        }
        Ok(acc)
    });
    let panel_vals: Vec<f64> = panel_vals.into_iter().collect::<Result<_>>()?;
    let c = riesz_constant(d, s);
    let integral = first + panel_vals.iter().sum::<f64>();
    let fourier_value = c * integral;

    // geometric continuation of the last two octaves
    let octave = |lo: f64, hi: f64| -> f64 {
        panel_vals
            .iter()
            .enumerate()
            .filter(|(p, _)| {
                let mid = width * (*p as f64 + 1.5);
                mid >= lo && mid < hi
            })
            .map(|(_, v)| v)
            .sum()
    };
    let last = octave(xi_max / 2.0, xi_max);
    let prev = octave(xi_max / 4.0, xi_max / 2.0);
    let tail_estimate = if last == 0.0 {
        0.0
    } else if prev > 0.0 && last < prev {
        let q = last / prev;
        c * last * q / (1.0 - q)
    } else {
        f64::INFINITY
    };
    if !(tail_estimate <= 0.2 * fourier_value) {
        return Err(Error::TruncationDominated {
            value: fourier_value,
            tail: tail_estimate,
        });
    }

    let spatial_value = if h > 0.0 {
        mollified_energy_spatial(mu, s, h)?
    } else {
        riesz_energy_spatial(mu, s)?.value
    };
    let atomic = riesz_energy_spatial(mu, s)?;
    Ok(EnergyReport {
        s,
        spatial_value,
        fourier_value,
        constant_used: c,
        relative_gap: (spatial_value - fourier_value).abs() / spatial_value,
        mollification_width: h,
        xi_max,
        tail_estimate,
        radial_nodes: FIRST_PANEL_ORDER + panels * PANEL_ORDER,
        atomic_spatial_value: atomic.value,
        clamped_pairs: atomic.clamped_pairs,
    })
}
