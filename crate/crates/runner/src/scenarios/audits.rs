//! Rotation concentration and distance-set consistency.

use fractal_lab::distance::{distance_consistency, ConsistencySpec};
use fractal_lab::rotation::{concentration_audit, haar_ball_probability, RotationMeasure};
use fractal_lab::FractalSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build, check_ambient, need_sets, sub_seed, Outcome, Scenario};
use crate::config::Defaults;
use crate::error::RunnerError;
use crate::record::{Check, Cmp, Group};

/// Constant allowed in front of `min((r/|z|)^beta, (r/|x|)^beta)`.
pub const CONCENTRATION_CONSTANT: f64 = 4.0;

pub const LEMMA_CONCENTRATION: Scenario = Scenario {
    name: "lemma_concentration",
    claim: "theta{g : |x - g z| < r} <= 4 min((r/|z|)^beta, (r/|x|)^beta) for Haar theta on random (x, z, r), and the exact Haar probability within tolerance standard errors of the sampled one",
    defaults: |_| {
        Ok(Defaults {
            rotation_samples: Some(100_000),
            samples: Some(200),
            tolerance: 3.0,
            ..Defaults::default()
        })
    },
    run: |cfg, art| {
        let n = cfg.n;
        if !(2..=3).contains(&n) {
            return Err(RunnerError::Config("exact Haar probabilities exist for n = 2, 3".into()));
        }
        let theta = RotationMeasure::haar(n, cfg.rotation_samples(), cfg.seed)?;
        let count = theta.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 3));
        let mut bound = Group::new("bound", "sampled mass <= 4 min((r/|z|)^beta, (r/|x|)^beta)", Some(1.0));
        let mut exact = Group::new("exact", "sampled mass within tolerance standard errors of the exact probability", Some(1.0));
        let mut csv = String::from("case,r,measured,bound,exact,stderr\n");
        for k in 0..cfg.samples() {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r: f64 = rng.random_range(0.01..1.5);
            let row = concentration_audit(&theta, &x, &z, &[r])?[0];
            let p = haar_ball_probability(n, &x, &z, r)?;
            let se = (p * (1.0 - p) / count).sqrt();
            let label = format!("case{k}");
            bound.push(
                Check::new(&label, row.measured, CONCENTRATION_CONSTANT * row.bound, Cmp::AtMost, 0.0).with("r", r),
            );
            exact.push(Check::new(&label, row.measured, p, Cmp::Within, cfg.tolerance() * se).with("stderr", se));
            csv.push_str(&format!("{k},{r},{},{},{p},{se}\n", row.measured, row.bound));
        }
        art.table("audit", csv);
        let worst = bound
            .checks
            .iter()
            .map(|c| if c.value == 0.0 { 0.0 } else { c.value / (c.bound / CONCENTRATION_CONSTANT) })
            .fold(0.0, f64::max);
        Ok(Outcome {
            notes: vec![format!("largest measured / min(...) ratio {worst:.4}")],
            groups: vec![bound, exact],
        })
    },
};

pub const DISTANCE_CONSISTENCY: Scenario = Scenario {
    name: "distance_consistency",
    claim: "Haar average of the lower density of S_g#(mu x nu), the fixed-r ball average and the weighted pairing of distance measures agree: largest ratio <= 1 + tolerance; radii are decreasing ball radii, the smallest used for the ball average",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(8),
            samples: Some(400),
            tolerance: 1.0,
            ..Defaults::default()
        };
        if n == 2 {
            // 32 x 32 grid on the unit square
            d.sets = vec![FractalSpec::power(FractalSpec::cantor(1.0, 5), 2)];
            d.radii = vec![0.25, 0.125, 0.0625];
        }
        Ok(d)
    },
    run: |cfg, art| {
        need_sets(cfg, 1)?;
        let mu = build(&cfg.sets[0])?;
        check_ambient(cfg, &mu, cfg.n, 0)?;
        let nu = match cfg.sets.get(1) {
            Some(s) => build(s)?,
            None => mu.clone(),
        };
        check_ambient(cfg, &nu, cfg.n, 1)?;
        art.set("mu", &mu, cfg.seed);
        if cfg.sets.len() > 1 {
            art.set("nu", &nu, cfg.seed);
        }
        if cfg.radii.len() < 2 {
            return Err(RunnerError::Config("distance_consistency needs at least two radii".into()));
        }
        let res = mu.resolution.max(nu.resolution);
        let spec = ConsistencySpec {
            radii: cfg.radii.clone(),
            r: *cfg.radii.last().unwrap(),
            bin_width: 2.0 * res,
            centers: cfg.samples(),
            seed: sub_seed(cfg.seed, 4),
        };
        let theta = RotationMeasure::haar(cfg.n, cfg.rotation_samples(), cfg.seed)?;
        let c = distance_consistency(&mu.measure, &nu.measure, &theta, &spec)?;
        let mut g = Group::new("agreement", "largest ratio of the three quantities <= 1 + tolerance", Some(1.0));
        g.push(
            Check::new("max_ratio", c.max_ratio(), 1.0, Cmp::AtMost, cfg.tolerance())
                .with("lower_density", c.lower_density)
                .with("ball_average", c.ball_average)
                .with("pairing", c.pairing),
        );
        Ok(Outcome {
            groups: vec![g],
            notes: vec!["the three sides agree exactly only for smooth mu and nu; atoms make the lower density blow up below the resolution".into()],
        })
    },
};
