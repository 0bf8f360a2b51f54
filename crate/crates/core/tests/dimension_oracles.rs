use fractal_lab::dimension::{
    box_counts, box_dimension, energy_dimension, geometric_scales, lebesgue_positivity, Verdict,
};
use fractal_lab::fractal::build_cantor;
use fractal_lab::measure::{pushforward, DiscreteMeasure};
use fractal_lab::rotation::{apply_s, haar_batch, Rotation};
use fractal_lab::FractalSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOG2_LOG3: f64 = 0.630_929_753_571_457_4;

fn random_square(n: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..2 * n).map(|_| rng.random::<f64>()).collect();
    DiscreteMeasure::uniform(2, coords, 1.0, 0.0).unwrap()
}

fn grid_square(m: usize) -> DiscreteMeasure {
    let h = 1.0 / m as f64;
    let coords = (0..m * m)
        .flat_map(|k| [((k % m) as f64 + 0.5) * h, ((k / m) as f64 + 0.5) * h])
        .collect();
    DiscreteMeasure::uniform(2, coords, 1.0, h).unwrap()
}

#[test]
fn uniform_square_has_dimension_two() {
    // boxes from an eighth of the square down to about four points each
    let mu = random_square(1 << 14, 3);
    let b = box_dimension(&mu, &geometric_scales(2.0, 3, 6, 1), 0.0).unwrap();
    assert!((b.fit.slope - 2.0).abs() <= 0.1, "{}", b.fit.slope);
}

#[test]
fn middle_thirds_counts_and_slope() {
    let c = build_cantor(LOG2_LOG3, 12).unwrap();
    let scales = geometric_scales(3.0, 0, 12, 1);
    for (j, bc) in box_counts(&c.measure, &scales).unwrap().iter().enumerate() {
        assert_eq!(bc.occupied.to_bits(), 2f64.powi(j as i32).to_bits());
    }
    let b = box_dimension(&c.measure, &scales[1..], c.resolution).unwrap();
    assert!((b.fit.slope - LOG2_LOG3).abs() <= 0.05);
}

#[test]
fn quarter_cantor_square_has_dimension_one() {
    let c = FractalSpec::power(FractalSpec::cantor(0.5, 10), 2).build().unwrap();
    let scales = geometric_scales(4.0, 0, 10, 1);
    for (j, bc) in box_counts(&c.measure, &scales).unwrap().iter().enumerate() {
        assert_eq!(bc.occupied, 4f64.powi(j as i32));
    }
    let b = box_dimension(&c.measure, &scales[1..], c.resolution).unwrap();
    assert!((b.fit.slope - 1.0).abs() <= 0.1, "{}", b.fit.slope);
}

#[test]
fn isometries_barely_move_the_slope() {
    let c = FractalSpec::power(FractalSpec::cantor(0.6, 9), 2).build().unwrap();
    let scales = geometric_scales(2.0, 4, 20, 2);
    let base = box_dimension(&c.measure, &scales, c.resolution).unwrap().fit.slope;
    let shifts = [[0.0, 0.0], [0.3, -0.2], [-5.1, 2.7], [0.05, 0.11]];
    for (k, g) in haar_batch(2, 2, 77).unwrap().into_iter().chain([Rotation::identity(2)]).enumerate() {
        for t in &shifts {
            let moved = pushforward(&c.measure, |p| {
                let q = g.apply(p);
                vec![q[0] + t[0], q[1] + t[1]]
            })
            .unwrap()
            .with_resolution(c.resolution);
            let s = box_dimension(&moved, &scales, c.resolution).unwrap().fit.slope;
            assert!((s - base).abs() <= 0.05, "transform {k} {t:?}: {s} vs {base}");
        }
    }
}

#[test]
fn subsets_occupy_fewer_cells() {
    let full = random_square(4000, 8);
    let coords: Vec<f64> = full.coords()[..2 * 1500].to_vec();
    let part = DiscreteMeasure::uniform(2, coords, 1.0, 0.0).unwrap();
    let scales = geometric_scales(2.0, 0, 10, 1);
    let a = box_counts(&part, &scales).unwrap();
    let b = box_counts(&full, &scales).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(x.occupied <= y.occupied);
    }
    assert!(b.windows(2).all(|w| w[0].occupied <= w[1].occupied));
}

#[test]
fn product_slope_dominates_factors() {
    let a = FractalSpec::cantor(0.4, 8);
    let b = FractalSpec::cantor(0.7, 12);
    let ca = a.build().unwrap();
    let cb = b.build().unwrap();
    let p = FractalSpec::product(a, b).build().unwrap();
    let scales = geometric_scales(2.0, 4, 28, 2);
    let floor = p.resolution;
    let sa = box_dimension(&ca.measure, &scales, floor).unwrap().fit.slope;
    let sb = box_dimension(&cb.measure, &scales, floor).unwrap().fit.slope;
    let sp = box_dimension(&p.measure, &scales, floor).unwrap().fit.slope;
    assert!(sp >= sa.max(sb) - 0.05, "{sp} vs {sa}, {sb}");
}

#[test]
fn positivity_examples() {
    let scales = geometric_scales(2.0, 1, 7, 1);
    let square = grid_square(256);
    let v = lebesgue_positivity(&square, &scales, square.resolution()).unwrap();
    assert_eq!(v.verdict, Verdict::Positive);

    let n = 4096;
    let coords = (0..n).flat_map(|j| [(j as f64 + 0.5) / n as f64, 0.3]).collect();
    let segment = DiscreteMeasure::uniform(2, coords, 1.0, 1.0 / n as f64).unwrap();
    let v = lebesgue_positivity(&segment, &scales, segment.resolution()).unwrap();
    assert_eq!(v.verdict, Verdict::Null);
    assert!((v.covered_volume.slope + 1.0).abs() < 0.1);

    let again = lebesgue_positivity(&segment, &scales, segment.resolution()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn generic_projections_of_a_big_product_have_positive_area() {
    // dim A = 3.2 > n + 1 for n = 2
    let a = FractalSpec::power(FractalSpec::cantor(0.8, 5), 4).build().unwrap();
    let scales = geometric_scales(2.0, 4, 12, 2);
    assert!(*scales.last().unwrap() >= a.resolution);
    let gs = haar_batch(2, 4, 41).unwrap();
    let positive = gs
        .iter()
        .filter(|g| {
            let img = pushforward(&a.measure, |p| apply_s(g, &p[..2], &p[2..]).unwrap()).unwrap();
            let v = lebesgue_positivity(&img, &scales, a.resolution).unwrap();
            v.verdict == Verdict::Positive
        })
        .count();
    assert_eq!(positive, 4);
}

#[test]
fn energy_dimension_examples() {
    let grid: Vec<f64> = (1..=19).map(|k| 0.05 * k as f64).collect();
    let cantor = build_cantor(LOG2_LOG3, 12).unwrap();
    let e = energy_dimension(&cantor, &grid).unwrap();
    println!("cantor {:?}", e.growth);
    assert!((0.55..=0.65).contains(&e.value), "{}", e.value);
    assert!(!e.zero_dimensional);

    let line = build_cantor(1.0, 12).unwrap();
    let e = energy_dimension(&line, &grid).unwrap();
    assert!(e.value >= 0.9, "{}", e.value);

    let bare = fractal_lab::ConstructedSet {
        measure: DiscreteMeasure::dirac(&[0.5], 1.0).unwrap(),
        nominal_dimension: 0.0,
        resolution: 0.0,
        provenance: FractalSpec::cantor(0.5, 1),
    };
    assert_eq!(energy_dimension(&bare, &grid).unwrap_err().code(), "no_level_sweep");
}
