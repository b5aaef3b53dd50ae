//! Total Ewald energy split into its parts.

use crate::error::Result;
use crate::fourier::{fourier_energy_exact, self_energy};
use crate::params::EwaldParams;
use crate::real_space::real_space;
use crate::system::PeriodicChargeSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaldEnergy {
    /// Truncated `erfc` pair sum.
    pub real: f64,
    /// `(2π/V) Σ_{k≠0} |ρ(k)|² e^{-k²/4α}/k²`.
    pub fourier: f64,
    /// `-√(α/π) Σ q_i²`.
    pub self_energy: f64,
}

impl EwaldEnergy {
    /// The smooth long-range energy, Fourier sum plus self term.
    pub fn long_range(&self) -> f64 {
        self.fourier + self.self_energy
    }

    pub fn total(&self) -> f64 {
        self.real + self.fourier + self.self_energy
    }
}

pub fn ewald_energy(system: &PeriodicChargeSystem, params: &EwaldParams) -> Result<EwaldEnergy> {
    Ok(EwaldEnergy {
        real: real_space(system, params)?.energy,
        fourier: fourier_energy_exact(system, params),
        self_energy: self_energy(system, params.alpha),
    })
}
