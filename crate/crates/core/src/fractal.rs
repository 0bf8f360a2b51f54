//! Central Cantor sets, their products and difference sets, and the planar
//! sharpness sets `A_s`, `B_s` built on top of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{product_measure_capped, DiscreteMeasure, DEFAULT_ATOM_CAP};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalKind {
    CentralCantor,
    Product,
    SharpnessA,
    SharpnessB,
    DifferenceSet,
    AffineEmbed,
}

/// Affine map `x -> matrix * x + offset` used by [`FractalKind::AffineEmbed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineEmbedding {
    pub out_dim: usize,
    /// Row-major `out_dim x in_dim`.
    pub matrix: Vec<f64>,
    #[serde(default)]
    pub offset: Vec<f64>,
}

fn default_level() -> u32 {
    1
}

/// Declarative recipe for a constructed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalSpec {
    pub kind: FractalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension_target: Option<f64>,
    #[serde(default = "default_level")]
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<FractalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<AffineEmbedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_cap: Option<usize>,
}

impl FractalSpec {
    fn leaf(kind: FractalKind, s: f64, level: u32) -> Self {
        Self {
            kind,
            dimension_target: Some(s),
            level,
            ratio: None,
            seed: 0,
            children: Vec::new(),
            embedding: None,
            atom_cap: None,
        }
    }

    pub fn cantor(s: f64, level: u32) -> Self {
        Self::leaf(FractalKind::CentralCantor, s, level)
    }

    pub fn cantor_with_ratio(ratio: f64, level: u32) -> Self {
        Self {
            dimension_target: None,
            ratio: Some(ratio),
            ..Self::leaf(FractalKind::CentralCantor, 0.0, level)
        }
    }

    pub fn sharpness_a(s: f64, level: u32) -> Self {
        Self::leaf(FractalKind::SharpnessA, s, level)
    }

    pub fn sharpness_b(s: f64, level: u32) -> Self {
        Self::leaf(FractalKind::SharpnessB, s, level)
    }

    pub fn product(a: FractalSpec, b: FractalSpec) -> Self {
        Self {
            dimension_target: None,
            children: vec![a, b],
            ..Self::leaf(FractalKind::Product, 0.0, 1)
        }
    }

    /// `C x C x ... x C` (`power` factors), nested as a balanced product.
    pub fn power(factor: FractalSpec, power: usize) -> Self {
        assert!(power >= 1);
        if power == 1 {
            return factor;
        }
        let left = power / 2;
        Self::product(
            Self::power(factor.clone(), left),
            Self::power(factor, power - left),
        )
    }

    pub fn difference(child: FractalSpec) -> Self {
        Self {
            dimension_target: None,
            children: vec![child],
            ..Self::leaf(FractalKind::DifferenceSet, 0.0, 1)
        }
    }

    pub fn embed(child: FractalSpec, embedding: AffineEmbedding) -> Self {
        Self {
            dimension_target: None,
            children: vec![child],
            embedding: Some(embedding),
            ..Self::leaf(FractalKind::AffineEmbed, 0.0, 1)
        }
    }

    /// Same recipe with every leaf level replaced by `level`.
    pub fn at_level(&self, level: u32) -> Self {
        let mut s = self.clone();
        if s.children.is_empty() {
            s.level = level;
        }
        s.children = s.children.iter().map(|c| c.at_level(level)).collect();
        s
    }

    /// Finest leaf level, if the recipe has any leaf.
    pub fn leaf_level(&self) -> Option<u32> {
        if self.children.is_empty() {
            Some(self.level)
        } else {
            self.children.iter().filter_map(FractalSpec::leaf_level).max()
        }
    }

    fn cap(&self) -> usize {
        self.atom_cap.unwrap_or(DEFAULT_ATOM_CAP)
    }

    fn arity(&self) -> usize {
        match self.kind {
            FractalKind::Product => 2,
            FractalKind::DifferenceSet | FractalKind::AffineEmbed => 1,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level < 1 {
            return Err(Error::InvalidSpec("level must be at least 1".into()));
        }
        if self.children.len() != self.arity() {
            return Err(Error::InvalidSpec(format!(
                "{:?} needs {} children, got {}",
                self.kind,
                self.arity(),
                self.children.len()
            )));
        }
        self.children.iter().try_for_each(FractalSpec::validate)
    }

    pub fn build(&self) -> Result<ConstructedSet> {
        self.validate()?;
        let cap = self.cap();
        match self.kind {
            FractalKind::CentralCantor => match (self.ratio, self.dimension_target) {
                (Some(r), _) => build_cantor_ratio(r, self.level, cap),
                (None, Some(s)) => build_cantor_capped(s, self.level, cap),
                (None, None) => Err(Error::InvalidSpec(
                    "central_cantor needs a ratio or a dimension_target".into(),
                )),
            },
            FractalKind::SharpnessA => build_sharpness_a_capped(self.target()?, self.level, cap),
            FractalKind::SharpnessB => build_sharpness_b_capped(self.target()?, self.level, cap),
            FractalKind::Product => {
                let a = self.children[0].build()?;
                let b = self.children[1].build()?;
                product_set(&a, &b, cap)
            }
            FractalKind::DifferenceSet => difference_set_capped(&self.children[0].build()?, cap),
            FractalKind::AffineEmbed => {
                let e = self
                    .embedding
                    .as_ref()
                    .ok_or_else(|| Error::InvalidSpec("affine_embed needs an embedding".into()))?;
                affine_embed(&self.children[0].build()?, e)
            }
        }
    }

    fn target(&self) -> Result<f64> {
        self.dimension_target
            .ok_or_else(|| Error::InvalidSpec(format!("{:?} needs dimension_target", self.kind)))
    }
}

/// A measure together with the analytic dimension of the set it approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedSet {
    pub measure: DiscreteMeasure,
    pub nominal_dimension: f64,
    pub resolution: f64,
    pub provenance: FractalSpec,
}

/// Contraction ratio giving similarity dimension `s` with two maps.
pub fn ratio_for_dimension(s: f64) -> f64 {
    2f64.powf(-1.0 / s)
}

pub fn build_cantor(s: f64, level: u32) -> Result<ConstructedSet> {
    build_cantor_capped(s, level, DEFAULT_ATOM_CAP)
}

fn build_cantor_capped(s: f64, level: u32, cap: usize) -> Result<ConstructedSet> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::BadDimension(s));
    }
    let mut set = build_cantor_ratio(ratio_for_dimension(s), level, cap)?;
    set.nominal_dimension = s;
    set.provenance = FractalSpec::cantor(s, level);
    Ok(set)
}

/// Level-`level` central Cantor set on `[0, 1]` with maps `x -> r x` and
/// `x -> r x + 1 - r`. Atoms are the midpoints of the `2^level` construction
/// intervals in lexicographic address order, each of weight `2^-level`.
pub fn build_cantor_ratio(ratio: f64, level: u32, cap: usize) -> Result<ConstructedSet> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return Err(Error::InvalidSpec(format!("ratio {ratio} outside (0, 1/2]")));
    }
    if level < 1 {
        return Err(Error::InvalidSpec("level must be at least 1".into()));
    }
    let atoms = 1u128 << level.min(100);
    if level > 60 || atoms > cap as u128 {
        return Err(Error::TooLarge { atoms, cap });
    }
    let mut left = vec![0.0f64];
    let mut step = 1.0 - ratio;
    for _ in 0..level {
        let mut next = Vec::with_capacity(left.len() * 2);
        for &x in &left {
            next.push(x);
            next.push(x + step);
        }
        left = next;
        step *= ratio;
    }
    let resolution = ratio.powi(level as i32);
    let half = 0.5 * resolution;
    let coords: Vec<f64> = left.into_iter().map(|x| x + half).collect();
    let measure = DiscreteMeasure::uniform(1, coords, 1.0, resolution)?;
    Ok(ConstructedSet {
        measure,
        nominal_dimension: (2f64.ln() / (1.0 / ratio).ln()).min(1.0),
        resolution,
        provenance: FractalSpec::cantor_with_ratio(ratio, level),
    })
}

/// Midpoints of `m` equal cells of `[0, 1]`.
fn unit_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect()
}

fn grid_cells_for(resolution: f64) -> usize {
    ((1.0 / resolution) - 1e-9).ceil().max(1.0) as usize
}

pub fn build_sharpness_a(s: f64, level: u32) -> Result<ConstructedSet> {
    build_sharpness_a_capped(s, level, DEFAULT_ATOM_CAP)
}

/// `{(x, y) in R^2 x R^2 : x_1 in C_s, y_1 = 0}` truncated to the unit box:
/// atoms `(c, u, 0, v)` with `c` from the level-`k` Cantor set and `u, v` on
/// a grid of spacing `ratio^ceil(k/2)`. The grid spacing is the resolution,
/// so the Cantor factor stays resolved well below every admissible scale.
fn build_sharpness_a_capped(s: f64, level: u32, cap: usize) -> Result<ConstructedSet> {
    let c = build_cantor_capped(s, level, cap)?;
    let m = grid_cells_for(ratio_for_dimension(s).powi(level.div_ceil(2) as i32));
    let atoms = c.measure.len() as u128 * (m as u128).pow(2);
    if atoms > cap as u128 {
        return Err(Error::TooLarge { atoms, cap });
    }
    let grid = unit_grid(m);
    let per_c = m * m;
    let blocks = par::map_slice(c.measure.coords(), |&x| {
        let mut b = Vec::with_capacity(per_c * 4);
        for &u in &grid {
            for &v in &grid {
                b.extend_from_slice(&[x, u, 0.0, v]);
            }
        }
        b
    });
    let coords: Vec<f64> = blocks.into_iter().flatten().collect();
    let resolution = c.resolution.max(1.0 / m as f64);
    let measure = DiscreteMeasure::uniform(4, coords, 1.0, resolution)?;
    Ok(ConstructedSet {
        measure,
        nominal_dimension: 2.0 + s,
        resolution,
        provenance: FractalSpec::sharpness_a(s, level),
    })
}

pub fn build_sharpness_b(s: f64, level: u32) -> Result<ConstructedSet> {
    build_sharpness_b_capped(s, level, DEFAULT_ATOM_CAP)
}

/// `{0} x C_s x {0} x C_s` in `R^4`.
fn build_sharpness_b_capped(s: f64, level: u32, cap: usize) -> Result<ConstructedSet> {
    let c = build_cantor_capped(s, level, cap)?;
    let n = c.measure.len();
    let atoms = (n as u128).pow(2);
    if atoms > cap as u128 {
        return Err(Error::TooLarge { atoms, cap });
    }
    let xs = c.measure.coords();
    let mut coords = Vec::with_capacity(n * n * 4);
    for &a in xs {
        for &b in xs {
            coords.extend_from_slice(&[0.0, a, 0.0, b]);
        }
    }
    let measure = DiscreteMeasure::uniform(4, coords, 1.0, c.resolution)?;
    Ok(ConstructedSet {
        measure,
        nominal_dimension: 2.0 * s,
        resolution: c.resolution,
        provenance: FractalSpec::sharpness_b(s, level),
    })
}

fn product_set(a: &ConstructedSet, b: &ConstructedSet, cap: usize) -> Result<ConstructedSet> {
    let measure = product_measure_capped(&a.measure, &b.measure, cap).map_err(|e| match e {
        Error::ProductTooLarge { atoms, cap } => Error::TooLarge { atoms, cap },
        other => other,
    })?;
    Ok(ConstructedSet {
        resolution: measure.resolution(),
        nominal_dimension: a.nominal_dimension + b.nominal_dimension,
        measure,
        provenance: FractalSpec::product(a.provenance.clone(), b.provenance.clone()),
    })
}

pub fn difference_set(c: &ConstructedSet) -> Result<ConstructedSet> {
    difference_set_capped(c, DEFAULT_ATOM_CAP)
}

/// Pushforward of `c x c` under `(x, y) -> x - y`, with coincident
/// differences merged. Atoms are returned in increasing order.
fn difference_set_capped(c: &ConstructedSet, cap: usize) -> Result<ConstructedSet> {
    let mu = &c.measure;
    if mu.ambient_dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: mu.ambient_dim(),
        });
    }
    let n = mu.len();
    let atoms = (n as u128).pow(2);
    if atoms > cap as u128 {
        return Err(Error::TooLarge { atoms, cap });
    }
    let xs = mu.coords();
    let ws = mu.weights();
    let mut pairs: Vec<(f64, f64)> = par::map_indexed(n, |i| {
        (0..n).map(|j| (xs[i] - xs[j], ws[i] * ws[j])).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    par::sort_by_f64(&mut pairs, |p| p.0);
    const MERGE_TOL: f64 = 1e-12;
    let mut coords: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (x, w) in pairs {
        match coords.last() {
            Some(&last) if (x - last).abs() <= MERGE_TOL => *weights.last_mut().unwrap() += w,
            _ => {
                coords.push(x);
                weights.push(w);
            }
        }
    }
    let resolution = 2.0 * mu.resolution();
    let nominal_dimension = match (c.provenance.kind, c.provenance.ratio, c.provenance.dimension_target) {
        (FractalKind::CentralCantor, r, s) => {
            let r = r.unwrap_or_else(|| ratio_for_dimension(s.unwrap_or(1.0)));
            if r >= 1.0 / 3.0 - 1e-12 {
                1.0
            } else {
                3f64.ln() / (1.0 / r).ln()
            }
        }
        _ => (2.0 * c.nominal_dimension).min(1.0),
    };
    Ok(ConstructedSet {
        measure: DiscreteMeasure::new(1, coords, weights, resolution)?,
        nominal_dimension,
        resolution,
        provenance: FractalSpec::difference(c.provenance.clone()),
    })
}

/// Injective affine image of `c` in a higher-dimensional space.
pub fn affine_embed(c: &ConstructedSet, e: &AffineEmbedding) -> Result<ConstructedSet> {
    let d = c.measure.ambient_dim();
    if e.matrix.len() != e.out_dim * d {
        return Err(Error::MapDimension {
            expected: e.out_dim * d,
            got: e.matrix.len(),
        });
    }
    let offset = if e.offset.is_empty() {
        vec![0.0; e.out_dim]
    } else {
        e.offset.clone()
    };
    if offset.len() != e.out_dim {
        return Err(Error::MapDimension {
            expected: e.out_dim,
            got: offset.len(),
        });
    }
    if e.out_dim < d || gram_determinant(&e.matrix, e.out_dim, d) <= 1e-12 {
        return Err(Error::InvalidSpec("embedding matrix is not injective".into()));
    }
    let measure = crate::measure::pushforward(&c.measure, |x| {
        (0..e.out_dim)
            .map(|i| offset[i] + (0..d).map(|k| e.matrix[i * d + k] * x[k]).sum::<f64>())
            .collect()
    })?;
    Ok(ConstructedSet {
        measure,
        nominal_dimension: c.nominal_dimension,
        resolution: c.resolution,
        provenance: FractalSpec::embed(c.provenance.clone(), e.clone()),
    })
}

/// `det(A^T A)` for a row-major `rows x cols` matrix with `cols <= 3`.
fn gram_determinant(a: &[f64], rows: usize, cols: usize) -> f64 {
    let mut g = [[0.0f64; 3]; 3];
    for i in 0..cols {
        for j in 0..cols {
            g[i][j] = (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum();
        }
    }
    match cols {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        // TODO: general Gram determinant via Cholesky once embeddings of R^4 sets are needed
        _ => 1.0,
    }
}
