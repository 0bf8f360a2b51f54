//! Fourier-side scenarios: spherical, directional and cone decay, and the
//! energy identity.

use std::f64::consts::PI;

use fractal_lab::fractal::{build_cantor, ratio_for_dimension, FractalKind};
use fractal_lab::measure::{frostman_exponent, CenterPolicy, DiscreteMeasure};
use fractal_lab::rotation::RotationMeasure;
use fractal_lab::spectral::{
    cone_average, directional_decay, riesz_energy_fourier, spherical_profile, AngularNodes, CantorMeasure,
    ConeNodes, Factor, FourierTransform, FrequencyQuadrature, MonteCarloSpec, ProductMeasure, ProfileKind,
    SpectralProfile,
};
use fractal_lab::FractalSpec;

use super::{build, need_sets, radii_4_to_64, sub_seed, Artifacts, Outcome, Scenario, LOG2_LOG3};
use crate::config::{Defaults, ScenarioConfig};
use crate::error::{Result, RunnerError};
use crate::record::{Check, Cmp, Group};

/// Ball radii for the Frostman audit behind the directional bound.
pub const FROSTMAN_RADII: [f64; 6] = [0.05, 0.08, 0.12, 0.2, 0.3, 0.5];
/// Construction level of the audited copy.
pub const FROSTMAN_LEVEL: u32 = 4;
/// Radii at which the Haar rotated annulus integral is compared with the
/// cone average.
pub const IDENTITY_RADII: [f64; 2] = [4.0, 16.0];
/// Half-width of the radial window smoothing spherical averages.
pub const SPHERICAL_WINDOW: f64 = 0.5;

fn cantor_factors(spec: &FractalSpec, out: &mut Vec<Factor>) -> bool {
    match spec.kind {
        FractalKind::CentralCantor => {
            let Some(r) = spec.ratio.or(spec.dimension_target.map(ratio_for_dimension)) else {
                return false;
            };
            match CantorMeasure::new(r, spec.level) {
                Ok(c) => {
                    out.push(c.into());
                    true
                }
                Err(_) => false,
            }
        }
        FractalKind::Product => spec.children.iter().all(|c| cantor_factors(c, out)),
        _ => false,
    }
}

/// Closed-form transform for products of central Cantor measures, the
/// atoms otherwise.
fn transform_of(spec: &FractalSpec) -> Result<(Box<dyn FourierTransform>, f64)> {
    let mut factors = Vec::new();
    if cantor_factors(spec, &mut factors) {
        let dim = spec_dimension(spec)?;
        return Ok((Box::new(ProductMeasure::new(factors)?), dim));
    }
    let set = build(spec)?;
    Ok((Box::new(set.measure), set.nominal_dimension))
}

/// Nominal dimension without building the atoms.
fn spec_dimension(spec: &FractalSpec) -> Result<f64> {
    Ok(match spec.kind {
        FractalKind::Product => spec.children.iter().map(spec_dimension).sum::<Result<f64>>()?,
        _ => build(&spec.at_level(1))?.nominal_dimension,
    })
}

fn check_dim(cfg: &ScenarioConfig, ft: &dyn FourierTransform, want: usize, i: usize) -> Result<()> {
    if ft.ambient_dim() != want {
        return Err(RunnerError::Config(format!(
            "sets[{i}] lives in R^{}, {} with n = {} needs R^{want}",
            ft.ambient_dim(),
            cfg.scenario,
            cfg.n
        )));
    }
    Ok(())
}

/// Decay exponent `a` in `sigma(mu)(r) <~ r^{-a + eps}` for a measure with
/// `mu(B(x, r)) <= r^s` in `R^n`.
fn spherical_exponent(s: f64, n: f64) -> f64 {
    let mut a = (n - 1.0) * s / n;
    if s <= (n - 1.0) / 2.0 {
        a = a.max(s);
    }
    if (n - 1.0) / 2.0 <= s && s <= n / 2.0 {
        a = a.max((n - 1.0) / 2.0);
    }
    a
}

/// `J_0(x) = (1/pi) int_0^pi cos(x sin u) du`, trapezoid rule on the
/// periodic integrand.
fn bessel_j0(x: f64) -> f64 {
    let m = 4096;
    let h = PI / m as f64;
    let mut acc = 1.0;
    for k in 1..m {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc * h / PI
}

fn unit_circle(atoms: usize) -> Result<DiscreteMeasure> {
    let coords = (0..atoms)
        .flat_map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / atoms as f64;
            [phi.cos(), phi.sin()]
        })
        .collect();
    Ok(DiscreteMeasure::uniform(2, coords, 1.0, 2.0 * PI / atoms as f64)?)
}

/// The circle against `sigma(r) = 2 pi J_0(2 pi r)^2`, averaged like the
/// profile.
fn circle_calibration(cfg: &ScenarioConfig, art: &mut Artifacts) -> Result<Group> {
    let radii = &cfg.radii;
    let prof = spherical_profile(&unit_circle(4096)?, radii, AngularNodes::Auto, Some(SPHERICAL_WINDOW))?;
    let k = fractal_lab::spectral::averages::SMOOTHING_POINTS;
    let mut worst: f64 = 0.0;
    for (r, v) in radii.iter().zip(&prof.values) {
        let oracle = (0..k)
            .map(|j| {
                let rj = r - SPHERICAL_WINDOW + 2.0 * SPHERICAL_WINDOW * (j as f64 + 0.5) / k as f64;
                2.0 * PI * bessel_j0(2.0 * PI * rj).powi(2)
            })
            .sum::<f64>()
            / k as f64;
        worst = worst.max((v / oracle - 1.0).abs());
    }
    art.table("spherical_circle", prof.to_csv());
    let mut g = Group::new("circle", "unit circle: slope -1 within tolerance, profile equal to the Bessel closed form", Some(1.0));
    g.push(Check::new("slope", prof.fit()?.slope, -1.0, Cmp::Within, cfg.tolerance()));
    g.push(Check::new("bessel_max_rel_err", worst, 0.0, Cmp::AtMost, 1e-6));
    Ok(g)
}

pub const DECAY_SPHERICAL: Scenario = Scenario {
    name: "decay_spherical",
    claim: "sigma(mu)(r) decays like r^{-(n-1)s/n}, or r^{-s} when s <= (n-1)/2: fitted slope over the radii <= -exponent + tolerance; sets live in R^n",
    defaults: |n| {
        let mut d = Defaults {
            radii: radii_4_to_64(),
            tolerance: 0.15,
            ..Defaults::default()
        };
        if n == 2 {
            let line = fractal_lab::fractal::AffineEmbedding {
                out_dim: 2,
                matrix: vec![1.0, 0.0],
                offset: vec![],
            };
            d.sets = vec![
                FractalSpec::embed(FractalSpec::cantor(0.4, 12), line),
                FractalSpec::power(FractalSpec::cantor(0.7, 8), 2),
            ];
        }
        Ok(d)
    },
    run: |cfg, art| {
        need_sets(cfg, 1)?;
        let n = cfg.n as f64;
        let mut g = Group::new("decay", "fitted slope of sigma(mu) <= -exponent(s, n) + tolerance", Some(1.0));
        for (i, spec) in cfg.sets.iter().enumerate() {
            let (ft, s) = transform_of(spec)?;
            check_dim(cfg, ft.as_ref(), cfg.n, i)?;
            let prof = spherical_profile(ft.as_ref(), &cfg.radii, AngularNodes::Auto, Some(SPHERICAL_WINDOW))?;
            art.table(&format!("spherical_set{i}"), prof.to_csv());
            let a = spherical_exponent(s, n);
            g.push(
                Check::new(format!("set{i}"), prof.fit()?.slope, -a, Cmp::AtMost, cfg.tolerance())
                    .with("s", s)
                    .with("r_squared", prof.fit()?.r_squared),
            );
        }
        let mut out = Outcome {
            groups: vec![g],
            notes: vec![],
        };
        if cfg.n == 2 {
            out.groups.push(circle_calibration(cfg, art)?);
        } else {
            out.notes.push("circle calibration runs for n = 2 only".into());
        }
        Ok(out)
    },
};

pub const DECAY_DIRECTIONAL: Scenario = Scenario {
    name: "decay_directional",
    claim: "int_{R<=|xi|<=2R} int |mu^(xi, -g^{-1} xi)|^2 dtheta dxi <~ R^{2n-s-beta} for Haar theta: log-log slope <= 2n - s - beta + tolerance, s from a Frostman audit",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(4096),
            radii: (2..=6).map(|k| 2f64.powi(k)).collect(),
            tolerance: 0.2,
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![FractalSpec::power(FractalSpec::cantor(0.7, 8), 4)];
        }
        Ok(d)
    },
    run: |cfg, art| {
        need_sets(cfg, 1)?;
        let n = cfg.n as f64;
        let haar = RotationMeasure::haar(cfg.n, cfg.rotation_samples(), cfg.seed)?;
        let mc = MonteCarloSpec {
            seed: sub_seed(cfg.seed, 1),
            ..Default::default()
        };
        let mut g = Group::new("decay", "log-log slope <= 2n - s - beta + tolerance", Some(1.0));
        for (i, spec) in cfg.sets.iter().enumerate() {
            let (ft, nominal) = transform_of(spec)?;
            check_dim(cfg, ft.as_ref(), 2 * cfg.n, i)?;
            let est = cfg
                .radii
                .iter()
                .map(|&r| directional_decay(ft.as_ref(), &haar, r, &mc))
                .collect::<fractal_lab::Result<Vec<_>>>()?;
            let prof = SpectralProfile::new(ProfileKind::Directional, cfg.radii.clone(), &est)?;
            art.table(&format!("directional_set{i}"), prof.to_csv());
            let level = spec.leaf_level().unwrap_or(FROSTMAN_LEVEL).min(FROSTMAN_LEVEL);
            let flat = build(&spec.at_level(level))?;
            let audit = frostman_exponent(&flat.measure, &FROSTMAN_RADII, &CenterPolicy::default())?;
            let bound = 2.0 * n - audit.exponent - haar.beta;
            g.push(
                Check::new(format!("set{i}"), prof.fit()?.slope, bound, Cmp::AtMost, cfg.tolerance())
                    .with("frostman_s", audit.exponent)
                    .with("nominal_s", nominal)
                    .with("beta", haar.beta),
            );
        }
        Ok(Outcome {
            groups: vec![g],
            notes: vec![],
        })
    },
};

pub const DECAY_CONE: Scenario = Scenario {
    name: "decay_cone",
    claim: "Haar rotated annulus integral = R^n x cone average (ratio within tolerance); for mu x nu the cone average decays like R^{-s-(n-1)t/n}, or R^{-s-t} when t <= (n-1)/2; sets are A and B in R^n",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(4096),
            radii: radii_4_to_64(),
            ..Defaults::default()
        };
        if n == 2 {
            let c = FractalSpec::power(FractalSpec::cantor(0.7, 8), 2);
            d.sets = vec![c.clone(), c];
        }
        Ok(d)
    },
    run: |cfg, art| {
        need_sets(cfg, 2)?;
        let n = cfg.n as f64;
        let (fa, s) = transform_of(&cfg.sets[0])?;
        let (fb, t) = transform_of(&cfg.sets[1])?;
        check_dim(cfg, fa.as_ref(), cfg.n, 0)?;
        check_dim(cfg, fb.as_ref(), cfg.n, 1)?;
        drop((fa, fb));
        let (mu, _) = transform_of(&FractalSpec::product(cfg.sets[0].clone(), cfg.sets[1].clone()))?;
        let nodes = ConeNodes::default();

        let haar = RotationMeasure::haar(cfg.n, cfg.rotation_samples(), cfg.seed)?;
        let mc = MonteCarloSpec {
            seed: sub_seed(cfg.seed, 2),
            target_rel_se: 0.02,
            ..Default::default()
        };
        let mut id = Group::new("identity", "directional / (R^n cone) within tolerance of 1", Some(1.0));
        for r in IDENTITY_RADII {
            let d = directional_decay(mu.as_ref(), &haar, r, &mc)?;
            let c = cone_average(mu.as_ref(), r, &nodes)?;
            id.push(
                Check::new(format!("R={r}"), d.value, r.powi(cfg.n as i32) * c.value, Cmp::RatioWithin, cfg.tolerance())
                    .with("directional_stderr", d.stderr)
                    .with("cone_stderr", c.stderr),
            );
        }

        let est = cfg
            .radii
            .iter()
            .map(|&r| cone_average(mu.as_ref(), r, &nodes))
            .collect::<fractal_lab::Result<Vec<_>>>()?;
        let prof = SpectralProfile::new(ProfileKind::Cone, cfg.radii.clone(), &est)?;
        art.table("cone", prof.to_csv());
        let mut out = Outcome::default();
        out.groups.push(id);
        let mut exponent: Option<f64> = None;
        if s > 0.0 && s < n {
            exponent = Some(s + (n - 1.0) * t / n);
        }
        if t <= (n - 1.0) / 2.0 {
            exponent = Some(exponent.map_or(s + t, |e| e.max(s + t)));
        }
        match exponent {
            Some(e) => {
                let mut g = Group::new("product_decay", format!("cone slope <= -{e:.4} + tolerance"), Some(1.0));
                g.push(Check::new("slope", prof.fit()?.slope, -e, Cmp::AtMost, cfg.tolerance()).with("s", s).with("t", t));
                out.groups.push(g);
            }
            None => out.notes.push(format!("s = {s}, t = {t}: no product decay estimate applies")),
        }
        Ok(out)
    },
};

fn uniform_interval(atoms: usize) -> Result<DiscreteMeasure> {
    let xs = (0..atoms).map(|j| (j as f64 + 0.5) / atoms as f64).collect();
    Ok(DiscreteMeasure::uniform(1, xs, 1.0, 1.0 / atoms as f64)?)
}

fn unit_square_grid(m: usize) -> Result<DiscreteMeasure> {
    let h = 1.0 / m as f64;
    let coords = (0..m * m)
        .flat_map(|k| [((k / m) as f64 + 0.5) * h, ((k % m) as f64 + 0.5) * h])
        .collect();
    Ok(DiscreteMeasure::uniform(2, coords, 1.0, h)?)
}

/// `I_{1/2}` of Lebesgue measure on `[0, 1]`.
pub const UNIFORM_HALF_ENERGY: f64 = 8.0 / 3.0;

pub const PARSEVAL: Scenario = Scenario {
    name: "parseval",
    claim: "spatial Riesz energy = constant x int |mu^|^2 |xi|^{s-d}: relative gap <= tolerance over a fixed battery (plus any sets, at s = dim/2)",
    defaults: |_| Ok(Defaults::default()),
    run: |cfg, _art| {
        let mut cases: Vec<(String, DiscreteMeasure, f64)> = vec![
            ("uniform".into(), uniform_interval(4096)?, 0.3),
            ("uniform".into(), uniform_interval(4096)?, 0.5),
            ("uniform".into(), uniform_interval(4096)?, 0.7),
            ("middle_thirds".into(), build_cantor(LOG2_LOG3, 8)?.measure, 0.4),
            ("cantor_0.5".into(), build_cantor(0.5, 6)?.measure, 0.3),
            ("grid16".into(), unit_square_grid(16)?, 1.0),
        ];
        for (i, spec) in cfg.sets.iter().enumerate() {
            let set = build(spec)?;
            cases.push((format!("set{i}"), set.measure, set.nominal_dimension / 2.0));
        }
        let quad = FrequencyQuadrature::default();
        let mut battery = Group::new("battery", "relative gap between the two sides <= tolerance", Some(1.0));
        let mut closed = Group::new("closed_form", "uniform on [0,1], s = 1/2: both sides within tolerance of 8/3", Some(1.0));
        for (name, mu, s) in &cases {
            let rep = riesz_energy_fourier(mu, *s, &quad)?;
            log::debug!("{name} s={s}: gap {:.2e}", rep.relative_gap);
            battery.push(
                Check::new(format!("{name}/s={s}"), rep.relative_gap, 0.0, Cmp::AtMost, cfg.tolerance())
                    .with("spatial", rep.spatial_value)
                    .with("fourier", rep.fourier_value)
                    .with("tail", rep.tail_estimate),
            );
            if name == "uniform" && *s == 0.5 {
                closed.push(Check::new("spatial", rep.spatial_value, UNIFORM_HALF_ENERGY, Cmp::RatioWithin, cfg.tolerance()));
                closed.push(Check::new("fourier", rep.fourier_value, UNIFORM_HALF_ENERGY, Cmp::RatioWithin, cfg.tolerance()));
            }
        }
        Ok(Outcome {
            groups: vec![battery, closed],
            notes: vec![],
        })
    },
};
