//! Acceptance battery. Runs without the libtest harness so every criterion
//! prints exactly one line, in order, even when an earlier one fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use fractal_lab::dimension::{box_counts, box_dimension, geometric_scales};
use fractal_lab::distance::{distance_measure, weighted_distance_pairing, BinSpec, DistanceMeasure};
use fractal_lab::fractal::build_cantor;
use fractal_lab::measure::DiscreteMeasure;
use fractal_lab::rotation::haar_batch;
use fractal_lab_runner::output::{self, REPRODUCIBILITY_TOLERANCE};
use fractal_lab_runner::record::Group;
use fractal_lab_runner::{run_scenario, ExperimentRecord, ScenarioConfig};

const LOG2_LOG3: f64 = 0.630_929_753_571_457_4;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(name: &str) -> Result<(ExperimentRecord, f64), String> {
    let t = Instant::now();
    let (rec, _) = run_scenario(&ScenarioConfig::new(name)).map_err(|e| e.to_string())?;
    Ok((rec, t.elapsed().as_secs_f64()))
}

fn group<'a>(rec: &'a ExperimentRecord, name: &str) -> Result<&'a Group, String> {
    rec.groups
        .iter()
        .find(|g| g.name == name)
        .ok_or_else(|| format!("{} has no group {name}", rec.scenario))
}

fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

fn c1_parseval() -> Outcome {
    let (rec, secs) = run("parseval")?;
    let closed = group(&rec, "closed_form")?;
    for c in &closed.checks {
        ensure(
            (c.value / (8.0 / 3.0) - 1.0).abs() <= 0.1,
            format!("{} = {} vs 8/3", c.label, c.value),
        )?;
    }
    let battery = group(&rec, "battery")?;
    ensure(battery.checks.len() >= 6, format!("battery has {} cases", battery.checks.len()))?;
    let worst = battery.checks.iter().map(|c| c.value).fold(0.0, f64::max);
    ensure(worst <= 0.1, format!("largest relative gap {worst}"))?;
    ensure(secs < 120.0, format!("took {secs:.1}s"))?;
    Ok(format!(
        "I_s = {:.4} (8/3), {} cases, worst gap {worst:.2e}, {secs:.1}s",
        closed.checks[0].value,
        battery.checks.len()
    ))
}

fn c2_cantor_dimension() -> Outcome {
    let c = build_cantor(LOG2_LOG3, 12).map_err(|e| e.to_string())?;
    let scales = geometric_scales(3.0, 0, 12, 1);
    let counts = box_counts(&c.measure, &scales).map_err(|e| e.to_string())?;
    for (j, bc) in counts.iter().enumerate() {
        ensure(
            bc.occupied.to_bits() == 2f64.powi(j as i32).to_bits(),
            format!("scale 3^-{j}: {} boxes", bc.occupied),
        )?;
    }
    let b = box_dimension(&c.measure, &scales[1..], c.resolution).map_err(|e| e.to_string())?;
    ensure((b.fit.slope - LOG2_LOG3).abs() <= 0.05, format!("slope {}", b.fit.slope))?;
    Ok(format!("slope {:.4}, counts 2^j exact for j <= 12", b.fit.slope))
}

fn c3_sharp_pi() -> Outcome {
    let (rec, secs) = run("sharp_pi")?;
    let g = group(&rec, "equality_set0")?;
    ensure(g.checks.len() == 20, format!("{} t values", g.checks.len()))?;
    for c in &g.checks {
        ensure((1.53..=1.73).contains(&c.value), format!("{}: slope {}", c.label, c.value))?;
    }
    ensure(secs < 300.0, format!("took {secs:.1}s"))?;
    Ok(format!("20 slopes in [1.53, 1.73], mean {:.4}, {secs:.1}s", g.mean_value()))
}

fn c4_exceptionless() -> Outcome {
    let (rec, _) = run("thm_S_trivial")?;
    let groups: Vec<&Group> = rec.groups.iter().filter(|g| g.name.starts_with("every_set")).collect();
    ensure(groups.len() == 3, format!("{} sets", groups.len()))?;
    let mut least = f64::INFINITY;
    for g in &groups {
        ensure(g.checks.len() == 50, format!("{}: {} rotations", g.name, g.checks.len()))?;
        for c in &g.checks {
            least = least.min(c.value - (c.bound - 0.1));
            ensure(c.value >= c.bound - 0.1, format!("{} {}: {} < {} - 0.1", g.name, c.label, c.value, c.bound))?;
        }
    }
    Ok(format!("150 of 150 slopes clear dim A - n - 0.1, least margin {least:.3}"))
}

fn c5_positivity() -> Outcome {
    let (rec, _) = run("thm_S_ac")?;
    let dim = rec.config.sets[0].build().map_err(|e| e.to_string())?.nominal_dimension;
    ensure((dim - 3.2).abs() < 1e-12, format!("nominal dimension {dim}"))?;
    let g = group(&rec, "positive_area_set0")?;
    ensure(g.checks.len() == 50, format!("{} rotations", g.checks.len()))?;
    let positive = g.checks.iter().filter(|c| c.verdict.as_deref() == Some("positive")).count();
    ensure(positive as f64 >= 0.9 * 50.0, format!("{positive}/50 positive"))?;
    Ok(format!("{positive}/50 verdicts positive"))
}

fn c6_concentration() -> Outcome {
    let (rec, _) = run("lemma_concentration")?;
    ensure(rec.config.n == 2, "not O(2)")?;
    let bound = group(&rec, "bound")?;
    let exact = group(&rec, "exact")?;
    ensure(bound.checks.len() == 200 && exact.checks.len() == 200, "expected 200 cases")?;
    let over: Vec<&str> = bound.failures();
    ensure(over.is_empty(), format!("bound exceeded in {over:?}"))?;
    let off: Vec<&str> = exact.failures();
    ensure(off.is_empty(), format!("more than 3 standard errors in {} cases: {off:?}", off.len()))?;
    Ok("200/200 under 4 min(r/|z|, r/|x|), 200/200 within 3 SE of the arc-length oracle".into())
}

fn c7_spherical() -> Outcome {
    let (rec, _) = run("decay_spherical")?;
    let decay = group(&rec, "decay")?;
    let c0 = decay.checks.first().ok_or("no decay check")?;
    ensure(c0.value <= -0.4 + 0.15, format!("Cantor(0.4) slope {}", c0.value))?;
    let circle = group(&rec, "circle")?;
    let slope = circle.checks.iter().find(|c| c.label == "slope").ok_or("no circle slope")?;
    ensure((slope.value + 1.0).abs() <= 0.15, format!("circle slope {}", slope.value))?;
    let bessel = circle.checks.iter().find(|c| c.label == "bessel_max_rel_err").ok_or("no Bessel check")?;
    ensure(bessel.pass, format!("Bessel relative error {}", bessel.value))?;
    Ok(format!(
        "Cantor(0.4) slope {:.4}, circle slope {:.4}, Bessel rel err {:.1e}",
        c0.value, slope.value, bessel.value
    ))
}

fn c8_directional() -> Outcome {
    let (rec, _) = run("decay_directional")?;
    let c = group(&rec, "decay")?.checks.first().ok_or("no decay check")?.clone();
    let s = c.extra["frostman_s"];
    let beta = c.extra["beta"];
    let limit = 2.0 * rec.config.n as f64 - s - beta + 0.2;
    ensure(c.value <= limit, format!("slope {} > {limit}", c.value))?;
    Ok(format!("slope {:.4} <= 2n - s - beta + 0.2 = {limit:.4} (s = {s:.4}, beta = {beta})", c.value))
}

fn c9_cone() -> Outcome {
    let (rec, _) = run("decay_cone")?;
    let g = group(&rec, "identity")?;
    let mut parts = Vec::new();
    for label in ["R=4", "R=16"] {
        let c = g.checks.iter().find(|c| c.label == label).ok_or(format!("no {label}"))?;
        let ratio = c.value / c.bound;
        ensure((ratio - 1.0).abs() <= 0.1, format!("{label}: ratio {ratio}"))?;
        parts.push(format!("{label} ratio {ratio:.4}"));
    }
    Ok(parts.join(", "))
}

fn c10_distance() -> Outcome {
    let n = 10_000;
    let coords = (0..n)
        .flat_map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let mu = DiscreteMeasure::uniform(2, coords, 1.0, 2.0 * PI / n as f64).map_err(|e| e.to_string())?;
    let width = 0.05;
    let dm = distance_measure(&mu, &mu, &BinSpec { width, max: Some(2.0) }).map_err(|e| e.to_string())?;
    let cdf = |t: f64| 2.0 / PI * (t.min(2.0) / 2.0).asin();
    let off = dm.off_diagonal_mass();
    let mut worst: f64 = 0.0;
    // antipodal pairs sit at t = 2 up to rounding and may land past the last edge
    let bins = (2.0 / width).round() as usize;
    let mut masses = dm.masses[..bins].to_vec();
    masses[bins - 1] += dm.masses[bins..].iter().sum::<f64>();
    for (i, m) in masses.iter().enumerate() {
        let e = cdf((i + 1) as f64 * width) - cdf(i as f64 * width);
        let rel = (m / off - e).abs() / e;
        worst = worst.max(rel);
        ensure(rel <= 0.05, format!("bin {i}: relative error {rel}"))?;
    }
    let edges: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
    let masses = edges.windows(2).map(|e| (e[1].min(2.0) - e[0].max(1.0)).max(0.0)).collect();
    let u = DistanceMeasure::from_bins(edges, masses, 0.0).map_err(|e| e.to_string())?;
    let p = weighted_distance_pairing(&u, &u, 2).map_err(|e| e.to_string())?;
    ensure((p - 2f64.ln()).abs() <= 0.02, format!("pairing {p}"))?;
    Ok(format!("chord bins within {:.2}%, pairing {p:.4} (ln 2 = {:.4})", 100.0 * worst, 2f64.ln()))
}

fn c11_haar() -> Outcome {
    let gs = haar_batch(2, 100_000, 11).map_err(|e| e.to_string())?;
    let resid = gs.iter().map(|g| g.orthogonality_error()).fold(0.0, f64::max);
    ensure(resid <= 1e-12, format!("n = 2 residual {resid}"))?;
    let ks = ks_uniform(
        gs.iter()
            .map(|g| {
                let v = g.apply(&[1.0, 0.0]);
                (v[1].atan2(v[0]) + PI) / (2.0 * PI)
            })
            .collect(),
    );
    ensure(ks < 0.01, format!("KS {ks}"))?;
    let gs3 = haar_batch(3, 100_000, 12).map_err(|e| e.to_string())?;
    let resid3 = gs3.iter().map(|g| g.orthogonality_error()).fold(0.0, f64::max);
    ensure(resid3 <= 1e-12, format!("n = 3 residual {resid3}"))?;
    let mut mean = [0.0; 3];
    let mut second = [0.0; 3];
    for g in &gs3 {
        let v = g.apply(&[1.0, 0.0, 0.0]);
        for k in 0..3 {
            mean[k] += v[k];
            second[k] += v[k] * v[k];
        }
    }
    let m = gs3.len() as f64;
    for k in 0..3 {
        ensure((mean[k] / m).abs() <= 0.01, format!("E[v_{k}] = {}", mean[k] / m))?;
        ensure((second[k] / m - 1.0 / 3.0).abs() <= 0.01, format!("E[v_{k}^2] = {}", second[k] / m))?;
    }
    Ok(format!("residual {:.1e}, KS {ks:.4}, n = 3 moments within 0.01", resid.max(resid3)))
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = Vec::new();
    for name in ["decay_cone", "lemma_concentration"] {
        let cfg = ScenarioConfig::new(name);
        let (a, art_a) = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let first = output::write_run(dir.path(), &a, &art_a).map_err(|e| e.to_string())?;
        let (b, art_b) = run_scenario(&cfg).map_err(|e| e.to_string())?;
        // refuses to write when the rerun drifts from the stored record
        let second = output::write_run(dir.path(), &b, &art_b).map_err(|e| e.to_string())?;
        ensure(first != second, "rerun overwrote the first directory")?;
        let stored = output::read_record(&first.join(output::RECORD_FILE)).map_err(|e| e.to_string())?;
        if let Some(d) = b.compare(&stored, REPRODUCIBILITY_TOLERANCE) {
            return Err(format!("{name}: {d}"));
        }
        for (file, _) in &art_a.tables {
            let x = fs::read(first.join(file)).map_err(|e| e.to_string())?;
            let y = fs::read(second.join(file)).map_err(|e| e.to_string())?;
            ensure(x == y, format!("{name}: {file} differs"))?;
        }
        checked.push(format!("{name} ({} aggregates)", a.aggregates().len()));
    }
    Ok(format!("{} reproduced to 1e-12", checked.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, c1_parseval),
        (2, c2_cantor_dimension),
        (3, c3_sharp_pi),
        (4, c4_exceptionless),
        (5, c5_positivity),
        (6, c6_concentration),
        (7, c7_spherical),
        (8, c8_directional),
        (9, c9_cone),
        (10, c10_distance),
        (11, c11_haar),
        (12, c12_determinism),
    ];
    let mut failed = 0;
    for (k, f) in criteria {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {k}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    println!("acceptance: {}/12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
