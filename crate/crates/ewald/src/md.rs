//! Velocity-Verlet molecular dynamics with Ewald or random batch Ewald
//! electrostatics and optional Andersen thermostat.

use rand_chacha::ChaCha8Rng;
use rbm_core::integrators::{apply_andersen, Thermostat};

use crate::electrolyte::LennardJones;
use crate::error::{Error, Result};
use crate::fourier::{fourier_energy_exact, fourier_exact, rbe_forces, self_energy};
use crate::kspace::{sum_s, KSampleBank};
use crate::params::EwaldParams;
use crate::real_space::real_space;
use crate::system::PeriodicChargeSystem;

/// How the Fourier-space forces are evaluated.
#[derive(Debug, Clone)]
pub enum FourierMethod {
    /// Full sum over `0 < |m| ≤ m_max` every step.
    Exact,
    /// `p` frequencies per step taken in order from the bank.
    Rbe(KSampleBank),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Largest component of `Σ_i F_i` at the new positions.
    pub net_force: f64,
    pub collisions: usize,
}

/// Energy breakdown of one configuration, Fourier part evaluated exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub real: f64,
    pub fourier: f64,
    pub self_energy: f64,
    pub lj: f64,
    pub kinetic: f64,
    /// `2K/(3N)`.
    pub temperature: f64,
}

impl EnergyRecord {
    pub fn potential(&self) -> f64 {
        self.real + self.fourier + self.self_energy + self.lj
    }
}

pub struct EwaldMd {
    pub system: PeriodicChargeSystem,
    params: EwaldParams,
    lj: Option<LennardJones>,
    method: FourierMethod,
    thermostat: Option<(f64, f64)>,
    thermostat_rng: ChaCha8Rng,
    s: f64,
    forces: Vec<f64>,
    fourier_estimate: f64,
    steps: u64,
}

impl EwaldMd {
    /// Set up the integrator and evaluate the initial forces. Only the
    /// Andersen thermostat is supported.
    pub fn new(
        system: PeriodicChargeSystem,
        params: EwaldParams,
        lj: Option<LennardJones>,
        method: FourierMethod,
        thermostat: Option<Thermostat>,
        thermostat_rng: ChaCha8Rng,
    ) -> Result<Self> {
        let l = system.box_length();
        params.validate(l)?;
        if system.state.velocities().is_none() {
            return Err(rbm_core::Error::MissingVelocities.into());
        }
        let thermostat = match thermostat {
            None => None,
            Some(t @ Thermostat::Andersen { nu, temperature }) => {
                t.validate()?;
                Some((nu, temperature))
            }
            Some(other) => {
                return Err(Error::InvalidParameter(format!(
                    "Ewald MD supports the Andersen thermostat only, got {other:?}"
                )))
            }
        };
        if let FourierMethod::Rbe(bank) = &method {
            if bank.alpha() != params.alpha || bank.box_length() != l {
                return Err(Error::InvalidParameter(
                    "frequency bank was sampled for a different α or box".into(),
                ));
            }
        }
        let mut md = Self {
            s: sum_s(params.alpha, l),
            system,
            params,
            lj,
            method,
            thermostat,
            thermostat_rng,
            forces: Vec::new(),
            fourier_estimate: 0.0,
            steps: 0,
        };
        md.forces = md.compute_forces()?;
        Ok(md)
    }

    pub fn params(&self) -> &EwaldParams {
        &self.params
    }

    pub fn method(&self) -> &FourierMethod {
        &self.method
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Forces at the current positions (for RBE, from the last batch drawn).
    pub fn forces(&self) -> &[f64] {
        &self.forces
    }

    /// Fourier k-sum energy computed alongside the last force evaluation:
    /// exact in [`FourierMethod::Exact`] mode, the batch estimate otherwise.
    pub fn fourier_estimate(&self) -> f64 {
        self.fourier_estimate
    }

    /// Evaluate all forces at the current positions; draws a new frequency
    /// batch in RBE mode.
    pub fn compute_forces(&mut self) -> Result<Vec<f64>> {
        let mut f = real_space(&self.system, &self.params)?.forces;
        let fourier = match &mut self.method {
            FourierMethod::Exact => fourier_exact(&self.system, &self.params),
            FourierMethod::Rbe(bank) => {
                let batch = bank.next_batch(self.params.p);
                rbe_forces(&self.system, batch, self.s)
            }
        };
        self.fourier_estimate = fourier.energy;
        for (a, b) in f.iter_mut().zip(&fourier.forces) {
            *a += b;
        }
        if let Some(lj) = &self.lj {
            let (g, _) = lj.forces_and_energy(&self.system.state)?;
            for (a, b) in f.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok(f)
    }

    /// One velocity-Verlet step with unit masses, followed by Andersen
    /// collisions.
    pub fn step(&mut self, dt: f64) -> Result<StepReport> {
        {
            let (pos, vel) = self.system.state.phase_mut()?;
            for k in 0..pos.len() {
                vel[k] += 0.5 * dt * self.forces[k];
                pos[k] += dt * vel[k];
            }
        }
        self.system.state.wrap();
        self.forces = self.compute_forces()?;
        {
            let (_, vel) = self.system.state.phase_mut()?;
            for k in 0..vel.len() {
                vel[k] += 0.5 * dt * self.forces[k];
            }
        }
        let mut net_force = 0.0f64;
        for c in 0..3 {
            let total: f64 = self.forces.iter().skip(c).step_by(3).sum();
            net_force = net_force.max(total.abs());
        }
        let collisions = match self.thermostat {
            Some((nu, temperature)) => {
                apply_andersen(&mut self.system.state, nu, temperature, dt, &mut self.thermostat_rng)?
            }
            None => 0,
        };
        self.system.state.time += dt;
        self.steps += 1;
        self.system.state.check_finite()?;
        Ok(StepReport { net_force, collisions })
    }

    /// Energies of the current configuration with the exact Fourier sum.
    pub fn energies(&self) -> Result<EnergyRecord> {
        let real = real_space(&self.system, &self.params)?.energy;
        let fourier = fourier_energy_exact(&self.system, &self.params);
        let lj = match &self.lj {
            Some(lj) => lj.forces_and_energy(&self.system.state)?.1,
            None => 0.0,
        };
        let kinetic = self.system.state.kinetic_energy().unwrap_or(0.0);
        Ok(EnergyRecord {
            real,
            fourier,
            self_energy: self_energy(&self.system, self.params.alpha),
            lj,
            kinetic,
            temperature: 2.0 * kinetic / (3.0 * self.system.len() as f64),
        })
    }
}
