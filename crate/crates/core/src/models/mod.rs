//! Reference models with their analytic equilibria and observables.

mod consensus;
mod cucker_smale;
mod dyson;
mod wealth;

pub use consensus::{consensus_functionals, ConsensusModel};
pub use cucker_smale::{flocking_functionals, CuckerSmaleModel};
pub use dyson::{semicircle_cdf, semicircle_density, DysonModel};
pub use wealth::{wealth_equilibrium_cdf, wealth_equilibrium_density, wealth_equilibrium_mode, WealthModel, WEALTH_ETA};

/// Debye–Hückel slope of `ln(r ρ(r))` for the monovalent electrolyte at
/// `ρ_r = 0.3`, `T = 1`: `κ_D = √(4π ρ_r)`.
pub const DH_SLOPE: f64 = -1.941;
pub const DH_INTERCEPT: f64 = -1.144;

/// Debye–Hückel reference line for `ln(r ρ(r))` of the radial net charge
/// density around an ion.
pub fn dh_reference(r: f64) -> f64 {
    DH_SLOPE * r + DH_INTERCEPT
}
