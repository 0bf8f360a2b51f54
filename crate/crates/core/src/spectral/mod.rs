//! Fourier analysis of atomic measures.

pub mod averages;
pub mod decay;
pub mod energy;
pub mod fourier;
pub mod quadrature;

pub use averages::{
    annulus_average, ball_integral, sigma_theta, spherical_average, spherical_profile, Estimate, ProfileKind,
    SpectralProfile,
};
pub use decay::{cone_average, cone_mass, directional_decay, ConeNodes, MonteCarloSpec};
pub use energy::{
    mollified_energy_spatial, riesz_constant, riesz_energy_fourier, riesz_energy_spatial, EnergyReport,
    FrequencyQuadrature, SpatialEnergy,
};
pub use fourier::{fourier_at, CantorMeasure, Factor, FourierTransform, Mollified, ProductMeasure};
pub use quadrature::AngularNodes;
