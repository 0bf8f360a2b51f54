//! Box-counting checks on images under `pi_t(x, y) = x - t y` and
//! `S_g(x, y) = x - g(y)`.

use fractal_lab::dimension::{box_dimension, lebesgue_positivity, BoxDimension, Positivity, FLAT_SLOPE};
use fractal_lab::fractal::FractalKind;
use fractal_lab::measure::pushforward;
use fractal_lab::par;
use fractal_lab::rotation::{apply_pi, apply_s, haar_batch, Rotation};
use fractal_lab::{ConstructedSet, FractalSpec};

use super::{
    build, check_ambient, grid, need_sets, t_values, usable_scales, Artifacts, FitTable, Outcome, Scenario,
    LOG2_LOG3,
};
use crate::config::{Defaults, ScenarioConfig};
use crate::error::{Result, RunnerError};
use crate::record::{Check, Cmp, Group};

/// A linear map `R^{2n} -> R^n` from one of the two families.
#[derive(Debug, Clone)]
enum Map {
    Pi(f64),
    S(Rotation),
}

impl Map {
    fn label(&self, i: usize) -> String {
        match self {
            Map::Pi(t) => format!("t={t:.6}"),
            Map::S(_) => format!("g{i}"),
        }
    }

    fn image(&self, set: &ConstructedSet, n: usize) -> Result<fractal_lab::DiscreteMeasure> {
        let mu = &set.measure;
        let img = match self {
            Map::Pi(t) => pushforward(mu, |p| apply_pi(*t, &p[..n], &p[n..]).expect("dims checked"))?,
            Map::S(g) => pushforward(mu, |p| apply_s(g, &p[..n], &p[n..]).expect("dims checked"))?,
        };
        Ok(img)
    }
}

fn maps(cfg: &ScenarioConfig, pi: bool) -> Result<Vec<Map>> {
    Ok(if pi {
        t_values(cfg.samples(), cfg.seed).into_iter().map(Map::Pi).collect()
    } else {
        haar_batch(cfg.n, cfg.rotation_samples(), cfg.seed)?
            .into_iter()
            .map(Map::S)
            .collect()
    })
}

fn scales_for(cfg: &ScenarioConfig, set: &ConstructedSet) -> Vec<f64> {
    usable_scales(&cfg.scales, set.resolution)
}

fn dims(cfg: &ScenarioConfig, set: &ConstructedSet, maps: &[Map]) -> Result<Vec<BoxDimension>> {
    let scales = scales_for(cfg, set);
    par::map_slice(maps, |m| -> Result<BoxDimension> {
        Ok(box_dimension(&m.image(set, cfg.n)?, &scales, set.resolution)?)
    })
    .into_iter()
    .collect()
}

fn positivity(cfg: &ScenarioConfig, set: &ConstructedSet, maps: &[Map]) -> Result<Vec<Positivity>> {
    let scales = scales_for(cfg, set);
    par::map_slice(maps, |m| -> Result<Positivity> {
        Ok(lebesgue_positivity(&m.image(set, cfg.n)?, &scales, set.resolution)?)
    })
    .into_iter()
    .collect()
}

fn param(c: Check, m: &Map, i: usize) -> Check {
    match m {
        Map::Pi(t) => c.with("t", *t),
        Map::S(g) => c.with("g_index", i as f64).with("det", g.determinant()),
    }
}

fn load_sets(cfg: &ScenarioConfig, art: &mut Artifacts, min: usize) -> Result<Vec<ConstructedSet>> {
    need_sets(cfg, min)?;
    let mut out = Vec::new();
    for (i, spec) in cfg.sets.iter().enumerate() {
        let set = build(spec)?;
        check_ambient(cfg, &set, 2 * cfg.n, i)?;
        art.set(&format!("set{i}"), &set, cfg.seed);
        out.push(set);
    }
    Ok(out)
}

fn failures_note(g: &Group, what: &str) -> Option<String> {
    let f = g.failures();
    (!f.is_empty()).then(|| format!("{}: {} of {} {what} fail: {}", g.name, f.len(), g.checks.len(), f.join(", ")))
}

/// Positivity of the covered volume: `|slope| <= tolerance` (flat).
fn positivity_group(
    cfg: &ScenarioConfig,
    art: &mut Artifacts,
    name: &str,
    claim: String,
    set: &ConstructedSet,
    maps: &[Map],
) -> Result<Group> {
    let mut g = Group::new(name, claim, Some(cfg.pass_fraction()));
    let mut table = FitTable::new();
    for (i, (m, p)) in maps.iter().zip(positivity(cfg, set, maps)?).enumerate() {
        let label = m.label(i);
        table.add_fit(&label, &p.covered_volume);
        let c = Check::new(&label, p.covered_volume.slope, 0.0, Cmp::Within, cfg.tolerance())
            .with_verdict(format!("{:?}", p.verdict).to_lowercase());
        g.push(param(c, m, i));
    }
    art.table(name, table.finish());
    Ok(g)
}

fn ac_defaults(n: usize, pi: bool) -> Result<Defaults> {
    let mut d = Defaults {
        tolerance: FLAT_SLOPE,
        scales: grid(2.0, 4, 12, 2),
        ..Defaults::default()
    };
    if pi {
        d.samples = Some(20);
    } else {
        d.rotation_samples = Some(50);
    }
    if n == 2 {
        d.sets = vec![FractalSpec::power(FractalSpec::cantor(0.8, 5), 4)];
    }
    Ok(d)
}

fn run_ac(cfg: &ScenarioConfig, art: &mut Artifacts, pi: bool) -> Result<Outcome> {
    let n = cfg.n as f64;
    let sets = load_sets(cfg, art, 1)?;
    let maps = maps(cfg, pi)?;
    let mut out = Outcome::default();
    for (i, set) in sets.iter().enumerate() {
        let d = set.nominal_dimension;
        let (need, family, e_bound) = if pi {
            (2.0 * n - 1.0, "t", 2.0 * n - d)
        } else {
            (n + 1.0, "g", 2.0 * n - d + (n - 1.0) * (n - 2.0) / 2.0)
        };
        if d <= need {
            return Err(RunnerError::Config(format!("sets[{i}] has dimension {d}, needs more than {need}")));
        }
        let claim = format!("dim A = {d:.4} > {need}: covered volume flat for almost every {family}");
        let g = positivity_group(cfg, art, &format!("positive_area_set{i}"), claim, set, &maps)?;
        out.notes.push(format!(
            "set{i}: exceptional {family} have dimension at most {e_bound:.4}; {:.1}% of samples verdict positive",
            100.0 * g.fraction()
        ));
        out.notes.extend(failures_note(&g, "samples"));
        out.groups.push(g);
    }
    Ok(out)
}

pub const THM_PI_AC: Scenario = Scenario {
    name: "thm_pi_ac",
    claim: "dim A > 2n-1 implies pi_t(A) has positive area for almost every t; tolerance = flatness of the covered volume",
    defaults: |n| ac_defaults(n, true),
    run: |c, a| run_ac(c, a, true),
};

pub const THM_S_AC: Scenario = Scenario {
    name: "thm_S_ac",
    claim: "dim A > n+1 implies S_g(A) has positive area for Haar almost every g; tolerance = flatness of the covered volume",
    defaults: |n| ac_defaults(n, false),
    run: |c, a| run_ac(c, a, false),
};

/// Almost-every lower bound for `dim pi_t(A)`.
fn pi_bound(d: f64, n: f64) -> f64 {
    let mut b: f64 = 0.0;
    if d > 2.0 * n - 1.0 {
        b = b.max(n);
    }
    if n <= d && d <= 2.0 * n - 1.0 {
        b = b.max(d - n + 1.0);
    }
    if d <= n {
        b = b.max(d.min(1.0));
    }
    b
}

/// Almost-every lower bound for `dim S_g(A)`.
fn s_bound(d: f64, n: f64) -> f64 {
    let mut b: f64 = 0.0;
    if d > n + 1.0 {
        b = b.max(n);
    }
    if n - 1.0 <= d && d <= n + 1.0 {
        b = b.max(d - 1.0);
    }
    if d <= n - 1.0 {
        b = b.max(d);
    }
    b
}

fn dim_groups(
    cfg: &ScenarioConfig,
    art: &mut Artifacts,
    i: usize,
    set: &ConstructedSet,
    maps: &[Map],
    bound: f64,
    every: bool,
) -> Result<Vec<Group>> {
    let d = set.nominal_dimension;
    let n = cfg.n as f64;
    let fits = dims(cfg, set, maps)?;
    let mut table = FitTable::new();
    let mut ae = Group::new(
        &format!("almost_every_set{i}"),
        format!("dim A = {d:.4}: box slope >= {bound:.4} for almost every sample"),
        Some(cfg.pass_fraction()),
    );
    let mut all = Group::new(
        &format!("every_set{i}"),
        format!("dim A = {d:.4}: box slope >= dim A - n = {:.4} for every sample", d - n),
        Some(1.0),
    );
    for (k, (m, b)) in maps.iter().zip(&fits).enumerate() {
        let label = m.label(k);
        table.add(&label, b);
        let s = b.fit.slope;
        ae.push(param(Check::new(&label, s, bound, Cmp::AtLeast, cfg.tolerance()), m, k).with("offset_spread", b.offset_spread));
        all.push(param(Check::new(&label, s, d - n, Cmp::AtLeast, cfg.tolerance()), m, k));
    }
    art.table(&format!("box_set{i}"), table.finish());
    Ok(if every { vec![ae, all] } else { vec![ae] })
}

fn run_dim(cfg: &ScenarioConfig, art: &mut Artifacts, pi: bool) -> Result<Outcome> {
    let n = cfg.n as f64;
    let sets = load_sets(cfg, art, 1)?;
    let maps = maps(cfg, pi)?;
    let mut out = Outcome::default();
    for (i, set) in sets.iter().enumerate() {
        let bound = if pi { pi_bound(set.nominal_dimension, n) } else { s_bound(set.nominal_dimension, n) };
        for g in dim_groups(cfg, art, i, set, &maps, bound, pi)? {
            out.notes.extend(failures_note(&g, "samples"));
            out.groups.push(g);
        }
    }
    out.notes.push(
        "exceptional-set estimates are evaluated at the endpoint only; the interpolating family is not sampled".into(),
    );
    Ok(out)
}

pub const THM_PI_DIM: Scenario = Scenario {
    name: "thm_pi_dim",
    claim: "dim pi_t(A) >= dim A - n + 1 (n <= dim A <= 2n-1) or >= min(dim A, 1) (dim A <= n) for almost every t, and >= dim A - n for every t",
    defaults: |n| {
        let mut d = Defaults {
            samples: Some(20),
            scales: grid(2.0, 3, 16, 2),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![
                FractalSpec::power(FractalSpec::cantor(0.6, 5), 4),
                FractalSpec::power(FractalSpec::cantor(0.4, 4), 4),
            ];
        }
        Ok(d)
    },
    run: |c, a| run_dim(c, a, true),
};

pub const THM_S_DIM: Scenario = Scenario {
    name: "thm_S_dim",
    claim: "dim S_g(A) >= dim A - 1 (n-1 <= dim A <= n+1) or >= dim A (dim A <= n-1) for Haar almost every g",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(20),
            scales: grid(2.0, 3, 20, 2),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![
                FractalSpec::power(FractalSpec::cantor(0.6, 5), 4),
                FractalSpec::power(FractalSpec::cantor(0.25, 3), 4),
            ];
        }
        Ok(d)
    },
    run: |c, a| run_dim(c, a, false),
};

pub const THM_S_TRIVIAL: Scenario = Scenario {
    name: "thm_S_trivial",
    claim: "dim S_g(A) >= dim A - n for every g, no exceptions (pass_fraction is not used)",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(50),
            scales: grid(2.0, 2, 12, 2),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![
                FractalSpec::power(FractalSpec::cantor(0.8, 4), 4),
                FractalSpec::power(FractalSpec::cantor(0.6, 4), 4),
                FractalSpec::sharpness_a(LOG2_LOG3, 6),
            ];
        }
        Ok(d)
    },
    run: |cfg, art| {
        let sets = load_sets(cfg, art, 1)?;
        let maps = maps(cfg, false)?;
        let mut out = Outcome::default();
        for (i, set) in sets.iter().enumerate() {
            let mut gs = dim_groups(cfg, art, i, set, &maps, 0.0, true)?;
            let every = gs.pop().expect("two groups");
            out.notes.extend(failures_note(&every, "rotations"));
            out.groups.push(every);
        }
        Ok(out)
    },
};

fn leaf_target(spec: &FractalSpec, kind: FractalKind, scenario: &str) -> Result<(f64, u32)> {
    match (spec.kind, spec.dimension_target) {
        (k, Some(s)) if k == kind => Ok((s, spec.level)),
        _ => Err(RunnerError::Config(format!(
            "{scenario} needs a {kind:?} set with a dimension_target"
        ))),
    }
}

pub const SHARP_PI: Scenario = Scenario {
    name: "sharp_pi",
    claim: "dim pi_t(A_s) = 1 + s: box slope within tolerance of 1 + s for every sampled t",
    defaults: |n| {
        let mut d = Defaults {
            samples: Some(20),
            scales: grid(3.0, 1, 4, 1),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![FractalSpec::sharpness_a(LOG2_LOG3, 8)];
        }
        Ok(d)
    },
    run: |cfg, art| {
        let sets = load_sets(cfg, art, 1)?;
        let maps = maps(cfg, true)?;
        let mut out = Outcome::default();
        for (i, (spec, set)) in cfg.sets.iter().zip(&sets).enumerate() {
            let (s, _) = leaf_target(spec, FractalKind::SharpnessA, cfg.scenario.as_str())?;
            let fits = dims(cfg, set, &maps)?;
            let mut g = Group::new(
                &format!("equality_set{i}"),
                format!("box slope of pi_t(A_s) within tolerance of 1 + s = {:.4}", 1.0 + s),
                Some(1.0),
            );
            let mut table = FitTable::new();
            for (k, (m, b)) in maps.iter().zip(&fits).enumerate() {
                let label = m.label(k);
                table.add(&label, b);
                g.push(param(Check::new(&label, b.fit.slope, 1.0 + s, Cmp::Within, cfg.tolerance()), m, k));
            }
            art.table(&format!("box_set{i}"), table.finish());
            out.notes.extend(failures_note(&g, "t"));
            out.groups.push(g);
        }
        Ok(out)
    },
};

/// `diag(g', 1)` for `g'` in O(n-1): both elements for n = 2, Haar
/// samples of O(2) for n = 3.
fn subgroup(n: usize, count: usize, seed: u64) -> Result<Vec<Rotation>> {
    Ok(match n {
        2 => vec![Rotation::diagonal(&[1.0, 1.0])?, Rotation::diagonal(&[-1.0, 1.0])?],
        _ => haar_batch(n - 1, count, seed)?.iter().map(Rotation::block_extend).collect(),
    })
}

pub const SHARP_S_SUBGROUP: Scenario = Scenario {
    name: "sharp_S_subgroup",
    claim: "S_g(B_s) = {0} x (C_s - C_s) for g in the embedded O(n-1): box slope within tolerance of dim(C_s - C_s); Haar g reach the generic bound",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(10),
            scales: grid(2.0, 2, 16, 2),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![FractalSpec::sharpness_b(0.5, 10)];
        }
        Ok(d)
    },
    run: |cfg, art| {
        if cfg.n != 2 {
            return Err(RunnerError::Config("B_s is built in R^4 only; use n = 2".into()));
        }
        let sets = load_sets(cfg, art, 1)?;
        let haar: Vec<Map> = maps(cfg, false)?;
        let sub: Vec<Map> = subgroup(cfg.n, cfg.rotation_samples(), cfg.seed)?.into_iter().map(Map::S).collect();
        let mut out = Outcome::default();
        for (i, (spec, set)) in cfg.sets.iter().zip(&sets).enumerate() {
            let (s, level) = leaf_target(spec, FractalKind::SharpnessB, cfg.scenario.as_str())?;
            let diff = build(&FractalSpec::difference(FractalSpec::cantor(s, 1)))?.nominal_dimension;
            let generic = s_bound(set.nominal_dimension, cfg.n as f64);
            let mut table = FitTable::new();

            let mut gs = Group::new(
                &format!("subgroup_set{i}"),
                format!("O(n-1) images: box slope within tolerance of dim(C - C) = {diff:.4}"),
                Some(1.0),
            );
            for (k, (m, b)) in sub.iter().zip(dims(cfg, set, &sub)?).enumerate() {
                let label = format!("sub{k}");
                table.add(&label, &b);
                gs.push(param(Check::new(&label, b.fit.slope, diff, Cmp::Within, cfg.tolerance()), m, k));
            }
            let mut gh = Group::new(
                &format!("haar_set{i}"),
                format!("Haar images: box slope >= {generic:.4} for almost every g"),
                Some(cfg.pass_fraction()),
            );
            for (k, (m, b)) in haar.iter().zip(dims(cfg, set, &haar)?).enumerate() {
                let label = m.label(k);
                table.add(&label, &b);
                gh.push(param(Check::new(&label, b.fit.slope, generic, Cmp::AtLeast, cfg.tolerance()), m, k));
            }
            art.table(&format!("box_set{i}"), table.finish());

            let mut gc = Group::new(&format!("contrast_set{i}"), "mean Haar slope minus mean subgroup slope", None);
            gc.push(Check::new("haar_minus_subgroup", gh.mean_value() - gs.mean_value(), 0.0, Cmp::AtLeast, 0.0));
            out.notes.push(format!(
                "set{i}: C_s is the central Cantor set (s = {s}, level {level}); its difference set has dimension \
                 {diff:.4}, which equals s only for sets whose difference set keeps their dimension"
            ));
            out.groups.extend([gs, gh, gc]);
        }
        Ok(out)
    },
};

/// Bounds for `A x B` with `A, B` in `R^n`: `(positivity, dimension)`.
fn product_regime(a: f64, b: f64, n: f64) -> (bool, Option<f64>) {
    let mixed = a + (n - 1.0) * b / n;
    let positive = a + b > n && (mixed > n || a > (n + 1.0) / 2.0);
    let mut dim = None;
    if mixed <= n {
        dim = Some(mixed);
    }
    if a + b <= n && b <= (n - 1.0) / 2.0 {
        dim = Some(dim.map_or(a + b, |d: f64| d.max(a + b)));
    }
    (positive, dim)
}

/// Upper bound for the dimension of the exceptional set of `g`, capped at
/// `dim O(n)`.
fn product_exceptional(a: f64, b: f64, n: f64, alpha: Option<f64>) -> f64 {
    let extra = (n - 1.0) * (n - 2.0) / 2.0;
    let lead = alpha.map_or(2.0 * n - 1.0, |x| x + n - 1.0);
    let mut e = lead - a - (n - 1.0) * b / n + extra;
    if b <= (n - 1.0) / 2.0 {
        e = e.min(lead - a - b + extra);
    }
    e.min(n * (n - 1.0) / 2.0)
}

pub const PROD_THM3: Scenario = Scenario {
    name: "prod_thm3",
    claim: "A x B: positive area of S_g(A x B) when dim A + (n-1)dim B/n > n or dim A > (n+1)/2 (with dim A + dim B > n); \
            otherwise dim S_g(A x B) >= dim A + (n-1)dim B/n, or dim A + dim B when dim B <= (n-1)/2; sets are (A, B) pairs; \
            tolerance is the slope tolerance, FLAT_SLOPE the flatness one",
    defaults: |n| {
        let mut d = Defaults {
            rotation_samples: Some(10),
            scales: grid(2.0, 4, 12, 2),
            ..Defaults::default()
        };
        if n == 2 {
            d.sets = vec![
                FractalSpec::power(FractalSpec::cantor(0.9, 7), 2),
                FractalSpec::power(FractalSpec::cantor(0.5, 4), 2),
                FractalSpec::power(FractalSpec::cantor(0.5, 5), 2),
                FractalSpec::power(FractalSpec::cantor(0.5, 5), 2),
            ];
        }
        Ok(d)
    },
    run: |cfg, art| {
        need_sets(cfg, 2)?;
        if cfg.sets.len() % 2 != 0 {
            return Err(RunnerError::Config("prod_thm3 takes sets in (A, B) pairs".into()));
        }
        let n = cfg.n as f64;
        let maps = maps(cfg, false)?;
        let mut out = Outcome::default();
        for (p, pair) in cfg.sets.chunks(2).enumerate() {
            let a = build(&pair[0])?;
            let b = build(&pair[1])?;
            check_ambient(cfg, &a, cfg.n, 2 * p)?;
            check_ambient(cfg, &b, cfg.n, 2 * p + 1)?;
            let (da, db) = (a.nominal_dimension, b.nominal_dimension);
            let ab = build(&FractalSpec::product(pair[0].clone(), pair[1].clone()))?;
            art.set(&format!("pair{p}"), &ab, cfg.seed);
            let (positive, dim) = product_regime(da, db, n);
            if positive {
                let claim = format!("dim A = {da:.4}, dim B = {db:.4}: covered volume flat for almost every g");
                let mut flat = cfg.clone();
                flat.tolerance = Some(FLAT_SLOPE);
                let g = positivity_group(&flat, art, &format!("positive_area_pair{p}"), claim, &ab, &maps)?;
                out.notes.push(format!(
                    "pair{p}: exceptional g for positivity have dimension at most {:.4}",
                    product_exceptional(da, db, n, None)
                ));
                out.notes.extend(failures_note(&g, "rotations"));
                out.groups.push(g);
            }
            if let Some(bound) = dim {
                let mut g = dim_groups(cfg, art, p, &ab, &maps, bound, false)?.remove(0);
                g.name = format!("dimension_pair{p}");
                g.claim = format!("dim A = {da:.4}, dim B = {db:.4}: box slope >= {bound:.4} for almost every g");
                out.notes.push(format!(
                    "pair{p}: exceptional g for dimension {bound:.4} have dimension at most {:.4}",
                    product_exceptional(da, db, n, Some(bound))
                ));
                out.notes.extend(failures_note(&g, "rotations"));
                out.groups.push(g);
            }
            if !positive && dim.is_none() {
                out.notes.push(format!("pair{p}: dim A = {da:.4}, dim B = {db:.4} meets no hypothesis; skipped"));
            }
        }
        Ok(out)
    },
};
