//! Discrete measures on Euclidean space and numerical checks of
//! Fourier-analytic projection and distance-set estimates.
//!
//! Everything here works on finitely supported measures: fractal sets are
//! replaced by a finite construction level, and every estimate carries the
//! resolution below which it stops meaning anything.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod distance;
pub mod error;
pub mod fit;
pub mod fractal;
pub mod measure;
pub mod par;
pub mod rotation;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
pub use fractal::{ConstructedSet, FractalSpec};
pub use measure::DiscreteMeasure;
pub use rotation::{Rotation, RotationMeasure};
