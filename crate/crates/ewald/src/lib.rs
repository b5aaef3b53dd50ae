//! Ewald summation for periodic Coulomb systems with an exact Fourier sum
//! and the random batch Ewald estimator, which samples `p` frequencies per
//! step from the discrete Gaussian `∝ exp(-k²/4α)`.

pub mod electrolyte;
pub mod energy;
pub mod error;
pub mod fourier;
pub mod kspace;
pub mod md;
pub mod output;
pub mod params;
pub mod real_space;
pub mod system;

pub use electrolyte::{ElectrolyteModel, LennardJones};
pub use energy::{ewald_energy, EwaldEnergy};
pub use error::{Error, Result};
pub use fourier::{
    fourier_energy_exact, fourier_exact, fourier_force_exact, fourier_forces_exact, rbe_force, rbe_forces,
    self_energy, FourierResult,
};
pub use kspace::{mh_sample_kvectors, structure_factor, sum_s, Frequency, KSampleBank};
pub use md::{EnergyRecord, EwaldMd, FourierMethod, StepReport};
pub use params::EwaldParams;
pub use real_space::{real_space, real_space_force, real_space_forces};
pub use system::PeriodicChargeSystem;
