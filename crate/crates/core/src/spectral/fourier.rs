//! Direct evaluation of Fourier transforms of atomic measures,
//! `mu^(xi) = sum_j w_j exp(-2 pi i xi . y_j)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{check_dim, DiscreteMeasure};

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let (big, small) = if self.sum.abs() >= x.abs() { (self.sum, x) } else { (x, self.sum) };
        self.c += (big - t) + small;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// Anything whose Fourier transform can be evaluated pointwise.
pub trait FourierTransform: Sync {
    fn ambient_dim(&self) -> usize;

    fn total_mass(&self) -> f64;

    /// Caller guarantees `xi.len() == ambient_dim()`.
    fn transform(&self, xi: &[f64]) -> Complex64;

    /// Radius of a ball around some center containing the support. Used to
    /// size angular and radial quadratures.
    fn extent(&self) -> f64;

    /// Diameter of the support, up to a factor of 2.
    fn diameter(&self) -> f64 {
        2.0 * self.extent()
    }

    fn modulus_sq(&self, xi: &[f64]) -> f64 {
        self.transform(xi).norm_sqr()
    }

    /// Factorization `mu = a x b` with `a` on the first `k` coordinates,
    /// when one is available.
    fn split_at(&self, _k: usize) -> Option<(Box<dyn FourierTransform + '_>, Box<dyn FourierTransform + '_>)> {
        None
    }
}

/// `p` minus the nearest integer, without a libm call. Phases beyond
/// 2^62 turns carry no information in f64 anyway.
#[inline]
fn reduce_turns(p: f64) -> f64 {
    if p.abs() < 4.0e18 {
        let t = p - (p as i64) as f64;
        if t > 0.5 {
            t - 1.0
        } else if t < -0.5 {
            t + 1.0
        } else {
            t
        }
    } else {
        0.0
    }
}

fn transform_atoms(mu: &DiscreteMeasure, xi: &[f64]) -> Complex64 {
    let d = mu.ambient_dim();
    let mut re = Kahan::default();
    let mut im = Kahan::default();
    for (y, &w) in mu.coords().chunks_exact(d).zip(mu.weights()) {
        let p: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
        let (s, c) = (-2.0 * std::f64::consts::PI * reduce_turns(p)).sin_cos();
        re.add(w * c);
        im.add(w * s);
    }
    Complex64::new(re.value(), im.value())
}

/// `mu^(xi)` with compensated summation.
pub fn fourier_at(mu: &DiscreteMeasure, xi: &[f64]) -> Result<Complex64> {
    check_dim(mu.ambient_dim(), xi.len())?;
    Ok(transform_atoms(mu, xi))
}

impl FourierTransform for DiscreteMeasure {
    fn ambient_dim(&self) -> usize {
        DiscreteMeasure::ambient_dim(self)
    }

    fn total_mass(&self) -> f64 {
        DiscreteMeasure::total_mass(self)
    }

    fn transform(&self, xi: &[f64]) -> Complex64 {
        transform_atoms(self, xi)
    }

    fn extent(&self) -> f64 {
        match self.bounding_box() {
            Some((lo, hi)) => 0.5 * lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt(),
            None => 0.0,
        }
    }
}

/// Level-`level` central Cantor measure on `[0, 1]` with contraction
/// `ratio`, atoms at the interval midpoints. Its transform is the finite
/// product `e^{-i pi xi} prod_k cos(pi xi (1 - ratio) ratio^{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorMeasure {
    ratio: f64,
    level: u32,
}

impl CantorMeasure {
    pub fn new(ratio: f64, level: u32) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 0.5) || level == 0 {
            return Err(Error::InvalidSpec(format!("cantor ratio {ratio} level {level}")));
        }
        Ok(Self { ratio, level })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn to_discrete(&self, cap: usize) -> Result<DiscreteMeasure> {
        Ok(crate::fractal::build_cantor_ratio(self.ratio, self.level, cap)?.measure)
    }
}

impl FourierTransform for CantorMeasure {
    fn ambient_dim(&self) -> usize {
        1
    }

    fn total_mass(&self) -> f64 {
        1.0
    }

    fn transform(&self, xi: &[f64]) -> Complex64 {
        let x = xi[0];
        let mut gap = 1.0 - self.ratio;
        let mut m = 1.0;
        for _ in 0..self.level {
            m *= (std::f64::consts::PI * reduce_turns(0.5 * x * gap) * 2.0).cos();
            gap *= self.ratio;
        }
        let (s, c) = (-std::f64::consts::PI * reduce_turns(0.5 * x) * 2.0).sin_cos();
        Complex64::new(m * c, m * s)
    }

    fn extent(&self) -> f64 {
        0.5 * (1.0 - self.ratio.powi(self.level as i32))
    }
}

/// One coordinate block of a [`ProductMeasure`].
#[derive(Debug, Clone)]
pub enum Factor {
    Atoms(DiscreteMeasure),
    Cantor(CantorMeasure),
}

impl Factor {
    fn dim(&self) -> usize {
        match self {
            Factor::Atoms(m) => m.ambient_dim(),
            Factor::Cantor(_) => 1,
        }
    }

    fn mass(&self) -> f64 {
        match self {
            Factor::Atoms(m) => m.total_mass(),
            Factor::Cantor(c) => c.total_mass(),
        }
    }

    fn transform(&self, xi: &[f64]) -> Complex64 {
        match self {
            Factor::Atoms(m) => transform_atoms(m, xi),
            Factor::Cantor(c) => c.transform(xi),
        }
    }

    fn extent(&self) -> f64 {
        match self {
            Factor::Atoms(m) => FourierTransform::extent(m),
            Factor::Cantor(c) => c.extent(),
        }
    }

    fn to_discrete(&self, cap: usize) -> Result<DiscreteMeasure> {
        match self {
            Factor::Atoms(m) => Ok(m.clone()),
            Factor::Cantor(c) => c.to_discrete(cap),
        }
    }
}

impl From<DiscreteMeasure> for Factor {
    fn from(m: DiscreteMeasure) -> Self {
        Factor::Atoms(m)
    }
}

impl From<CantorMeasure> for Factor {
    fn from(c: CantorMeasure) -> Self {
        Factor::Cantor(c)
    }
}

/// `mu_1 x ... x mu_k` kept in factored form, so the transform costs the
/// sum of the factor sizes rather than their product.
#[derive(Debug, Clone)]
pub struct ProductMeasure {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
}

impl ProductMeasure {
    pub fn new<F: Into<Factor>>(factors: Vec<F>) -> Result<Self> {
        let factors: Vec<Factor> = factors.into_iter().map(Into::into).collect();
        if factors.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        for f in &factors {
            offsets.push(acc);
            acc += f.dim();
        }
        offsets.push(acc);
        Ok(Self { factors, offsets })
    }

    pub fn power<F: Into<Factor> + Clone>(factor: &F, k: usize) -> Result<Self> {
        Self::new(vec![factor.clone(); k])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Materialize as a single atomic measure.
    pub fn to_discrete(&self, cap: usize) -> Result<DiscreteMeasure> {
        let mut acc = self.factors[0].to_discrete(cap)?;
        for f in &self.factors[1..] {
            acc = crate::measure::product_measure_capped(&acc, &f.to_discrete(cap)?, cap)?;
        }
        Ok(acc)
    }

    fn sub(&self, range: std::ops::Range<usize>) -> ProductMeasure {
        ProductMeasure::new(self.factors[range].to_vec()).expect("nonempty range")
    }
}

impl FourierTransform for ProductMeasure {
    fn ambient_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn total_mass(&self) -> f64 {
        self.factors.iter().map(Factor::mass).product()
    }

    fn transform(&self, xi: &[f64]) -> Complex64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.transform(&xi[self.offsets[i]..self.offsets[i + 1]]))
            .product()
    }

    fn extent(&self) -> f64 {
        self.factors.iter().map(|f| f.extent().powi(2)).sum::<f64>().sqrt()
    }

    fn split_at(&self, k: usize) -> Option<(Box<dyn FourierTransform + '_>, Box<dyn FourierTransform + '_>)> {
        let i = self.offsets.iter().position(|&o| o == k)?;
        if i == 0 || i == self.factors.len() {
            return None;
        }
        Some((
            Box::new(self.sub(0..i)),
            Box::new(self.sub(i..self.factors.len())),
        ))
    }
}

/// Convolution of a measure with the centered Gaussian of per-coordinate
/// standard deviation `width`.
#[derive(Debug, Clone)]
pub struct Mollified<M> {
    pub inner: M,
    pub width: f64,
}

impl<M: FourierTransform> Mollified<M> {
    pub fn new(inner: M, width: f64) -> Self {
        Self { inner, width }
    }

    pub fn damping(&self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        (-2.0 * std::f64::consts::PI.powi(2) * self.width * self.width * r2).exp()
    }
}

impl<M: FourierTransform> FourierTransform for Mollified<M> {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn transform(&self, xi: &[f64]) -> Complex64 {
        self.inner.transform(xi) * self.damping(xi)
    }

    fn extent(&self) -> f64 {
        self.inner.extent()
    }
}
