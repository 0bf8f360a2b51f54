//! Gauss-Legendre rules and node sets on spheres.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::unit_sphere_area;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// How many directions to use on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularNodes {
    /// Enough nodes to resolve the transform at the given radius.
    #[default]
    Auto,
    Fixed(usize),
}

pub const MIN_NODES_2D: usize = 64;
pub const MIN_NODES_3D: usize = 512;

/// Directions and weights on `S^{d-1}`; the weights sum to the sphere area.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub directions: Vec<f64>,
    pub weights: Vec<f64>,
    /// Whether each direction stands for itself and its antipode; the
    /// weights already account for both.
    pub antipodal: bool,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self, k: usize) -> &[f64] {
        &self.directions[k * self.dim..(k + 1) * self.dim]
    }

    /// Number of distinct directions this rule represents.
    pub fn node_count(&self) -> usize {
        if self.antipodal {
            2 * self.len()
        } else {
            self.len()
        }
    }
}

/// Node count needed at radius `rho` for a transform with support extent
/// `extent`.
pub fn auto_nodes(dim: usize, rho: f64, extent: f64) -> usize {
    match dim {
        1 => 2,
        2 => {
            let m = (4.0 * PI * rho * extent).ceil() as usize + 32;
            m.max(MIN_NODES_2D).next_multiple_of(2)
        }
        _ => {
            let band = 2.0 * PI * rho * extent;
            ((4.0 * band * band).ceil() as usize + 256).max(MIN_NODES_3D)
        }
    }
}

pub fn resolve_nodes(dim: usize, nodes: AngularNodes, rho: f64, extent: f64) -> Result<usize> {
    match nodes {
        AngularNodes::Auto => Ok(auto_nodes(dim, rho, extent)),
        AngularNodes::Fixed(m) => {
            let min = match dim {
                1 => 2,
                2 => MIN_NODES_2D,
                _ => MIN_NODES_3D,
            };
            if m < min {
                return Err(Error::InvalidSpec(format!(
                    "{m} angular nodes in dimension {dim}, need at least {min}"
                )));
            }
            Ok(m)
        }
    }
}

/// Sphere rule with `count` nodes. For `|f|^2` of a real measure the
/// integrand is even, which lets the circle rule use half the directions.
pub fn sphere_rule(dim: usize, count: usize) -> Result<SphereRule> {
    let area = unit_sphere_area(dim);
    match dim {
        1 => Ok(SphereRule {
            dim,
            directions: vec![1.0],
            weights: vec![2.0],
            antipodal: true,
        }),
        2 => {
            let m = count.max(2).next_multiple_of(2);
            let half = m / 2;
            let mut directions = Vec::with_capacity(2 * half);
            for k in 0..half {
                let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                directions.push(phi.cos());
                directions.push(phi.sin());
            }
            Ok(SphereRule {
                dim,
                directions,
                weights: vec![2.0 * area / m as f64; half],
                antipodal: true,
            })
        }
        3 => {
            let m = count.max(1);
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut directions = Vec::with_capacity(3 * m);
            for k in 0..m {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                directions.extend_from_slice(&[r * phi.cos(), r * phi.sin(), z]);
            }
            Ok(SphereRule {
                dim,
                directions,
                weights: vec![area / m as f64; m],
                antipodal: false,
            })
        }
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}
