//! Log-log regression used by every dimension and decay estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points a [`ScalingFit`] is allowed to use.
pub const MIN_FIT_POINTS: usize = 4;

/// Ordinary least squares of `y` against `x`: `(slope, intercept, r_squared)`.
///
/// `r_squared` is 1 when `y` is constant along a non-degenerate `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return (f64::NAN, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Result of fitting `log_values` against `log_scales` over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub log_scales: Vec<f64>,
    pub log_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-open index range into `log_scales` that was actually fitted.
    pub scale_window: (usize, usize),
}

impl ScalingFit {
    /// Fit over the whole input.
    pub fn new(log_scales: Vec<f64>, log_values: Vec<f64>) -> Result<Self> {
        let n = log_scales.len();
        Self::windowed(log_scales, log_values, (0, n))
    }

    /// Fit over `window = (lo, hi)` while keeping the full series for reporting.
    pub fn windowed(
        log_scales: Vec<f64>,
        log_values: Vec<f64>,
        window: (usize, usize),
    ) -> Result<Self> {
        if log_scales.len() != log_values.len() {
            return Err(Error::Dimension {
                expected: log_scales.len(),
                got: log_values.len(),
            });
        }
        let (lo, hi) = window;
        let used = hi.saturating_sub(lo);
        if hi > log_scales.len() || used < MIN_FIT_POINTS {
            return Err(Error::InsufficientScales {
                needed: MIN_FIT_POINTS,
                got: used.min(log_scales.len()),
            });
        }
        let (slope, intercept, r_squared) =
            least_squares(&log_scales[lo..hi], &log_values[lo..hi]);
        if !slope.is_finite() {
            return Err(Error::DegenerateInput("scales do not vary".into()));
        }
        Ok(Self {
            log_scales,
            log_values,
            slope,
            intercept,
            r_squared,
            scale_window: window,
        })
    }

    pub fn points_used(&self) -> usize {
        self.scale_window.1 - self.scale_window.0
    }

    /// Largest absolute residual inside the fitted window.
    pub fn max_residual(&self) -> f64 {
        let (lo, hi) = self.scale_window;
        (lo..hi)
            .map(|i| (self.log_values[i] - self.slope * self.log_scales[i] - self.intercept).abs())
            .fold(0.0, f64::max)
    }
}

/// Log-log slope of `values` against `radii` (natural logs), at least four points.
pub fn loglog_fit(radii: &[f64], values: &[f64]) -> Result<ScalingFit> {
    if values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::DegenerateInput(
            "log-log fit needs positive finite values".into(),
        ));
    }
    ScalingFit::new(
        radii.iter().map(|r| r.ln()).collect(),
        values.iter().map(|v| v.ln()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let r: Vec<f64> = (0..8).map(|i| 2f64.powi(i)).collect();
        let v: Vec<f64> = r.iter().map(|x| 3.0 * x.powf(-0.75)).collect();
        let fit = loglog_fit(&r, &v).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.max_residual() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let err = ScalingFit::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap_err();
        assert_eq!(err.code(), "insufficient_scales");
    }

    #[test]
    fn window_subrange() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let mut y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        y[0] = 100.0;
        y[9] = -100.0;
        let fit = ScalingFit::windowed(x, y, (1, 9)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert_eq!(fit.points_used(), 8);
    }
}
