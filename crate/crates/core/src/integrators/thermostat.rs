use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::state::ParticleState;

/// Heat-bath coupling for second-order dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thermostat {
    /// Stochastic collisions at frequency `ν` with a bath at temperature `T`.
    Andersen { nu: f64, temperature: f64 },
    /// Friction `γ` and noise `√(2γ/β)` added to the equations of motion.
    Langevin { gamma: f64, beta: f64 },
    /// Deterministic feedback variable `ξ` with thermal mass `Q`.
    NoseHoover { q: f64, beta: f64, xi: f64 },
}

impl Thermostat {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Thermostat::Andersen { nu, temperature } => nu > 0.0 && temperature > 0.0,
            Thermostat::Langevin { gamma, beta } => gamma > 0.0 && beta > 0.0,
            Thermostat::NoseHoover { q, beta, xi } => q > 0.0 && beta > 0.0 && xi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("thermostat parameters must be positive: {self:?}")))
        }
    }

    /// Bath temperature `T = 1/β`.
    pub fn temperature(&self) -> f64 {
        match *self {
            Thermostat::Andersen { temperature, .. } => temperature,
            Thermostat::Langevin { beta, .. } | Thermostat::NoseHoover { beta, .. } => 1.0 / beta,
        }
    }
}

/// Andersen collisions: each particle independently redraws its velocity
/// from `N(0, T I_d)` with probability `1 - exp(-ν dt)`. Returns the number
/// of collisions.
pub fn apply_andersen<R: Rng + ?Sized>(
    state: &mut ParticleState,
    nu: f64,
    temperature: f64,
    dt: f64,
    rng: &mut R,
) -> Result<usize> {
    let dim = state.dim();
    let vel = state.velocities_mut().ok_or(Error::MissingVelocities)?;
    let prob = -(-nu * dt).exp_m1();
    let scale = temperature.sqrt();
    let mut collisions = 0;
    for v in vel.chunks_mut(dim) {
        if rng.random::<f64>() < prob {
            collisions += 1;
            for c in v.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c = scale * z;
            }
        }
    }
    Ok(collisions)
}

/// One explicit Euler step of the Nosé–Hoover equations in real variables
/// (unit masses):
/// `ṙ = p`, `ṗ = F - ξ p`, `ξ̇ = (Σ|p|² - dN/β)/Q`.
///
/// `forces` (N×d) are evaluated by the caller at the current positions.
/// Returns the updated `ξ`.
pub fn nose_hoover_step(
    state: &mut ParticleState,
    xi: f64,
    q: f64,
    beta: f64,
    dt: f64,
    forces: &[f64],
) -> Result<f64> {
    let dim = state.dim();
    let n = state.len();
    if forces.len() != n * dim {
        return Err(Error::Shape(format!("{} force entries for {n}×{dim} state", forces.len())));
    }
    let box_length = state.box_length();
    let (pos, vel) = state.phase_mut()?;
    let twice_kinetic: f64 = vel.iter().map(|v| v * v).sum();
    for k in 0..n * dim {
        let p = vel[k];
        pos[k] += p * dt;
        if let Some(l) = box_length {
            pos[k] = crate::state::wrap_coordinate(pos[k], l);
        }
        vel[k] = p + (forces[k] - xi * p) * dt;
    }
    state.time += dt;
    state.check_finite()?;
    Ok(xi + dt / q * (twice_kinetic - (dim * n) as f64 / beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{direct_step, SecondOrderSystem};
    use crate::kernel::KernelSpec;
    use crate::rng::{RngStream, StepRngs};

    #[test]
    fn no_collisions_at_zero_frequency() {
        let mut s = ParticleState::new(3, vec![0.0; 30]).unwrap().with_velocities(vec![0.7; 30]).unwrap();
        let mut rng = RngStream::new(0, 2).rng();
        assert_eq!(apply_andersen(&mut s, 0.0, 1.0, 0.1, &mut rng).unwrap(), 0);
        assert!(s.velocities().unwrap().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn large_frequency_redraws_everything() {
        let n = 20_000;
        let mut s = ParticleState::new(1, vec![0.0; n]).unwrap().with_velocities(vec![5.0; n]).unwrap();
        let mut rng = RngStream::new(1, 2).rng();
        assert_eq!(apply_andersen(&mut s, 1e6, 2.0, 1.0, &mut rng).unwrap(), n);
        let v = s.velocities().unwrap();
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((m2 - 2.0).abs() < 0.1, "{m2}");
    }

    #[test]
    fn collision_fraction() {
        let n = 100_000;
        let mut s = ParticleState::new(1, vec![0.0; n]).unwrap().with_zero_velocities();
        let mut rng = RngStream::new(2, 2).rng();
        let hits = apply_andersen(&mut s, 10.0, 1.0, 0.01, &mut rng).unwrap();
        let f = hits as f64 / n as f64;
        assert!((f - 0.0952).abs() < 0.003, "{f}");
    }

    #[test]
    fn andersen_harmonic_trap_reaches_temperature() {
        let temperature = 1.5;
        let sys = SecondOrderSystem::new(KernelSpec::zero(), 0.0).with_linear_drift(1.0);
        let mut s = ParticleState::from_scalars(&[1.0]).unwrap().with_zero_velocities();
        let mut rngs = StepRngs::new(3);
        let dt = 0.01;
        let (mut m2, mut count) = (0.0, 0usize);
        for k in 0..1_000_000 {
            direct_step(&mut s, &sys, dt, &mut rngs).unwrap();
            apply_andersen(&mut s, 1.0, temperature, dt, &mut rngs.thermostat).unwrap();
            if k >= 10_000 {
                m2 += s.velocities().unwrap()[0].powi(2);
                count += 1;
            }
        }
        let m2 = m2 / count as f64;
        assert!((m2 / temperature - 1.0).abs() < 0.03, "{m2}");
    }

    #[test]
    fn langevin_positional_variance_is_inverse_beta() {
        let beta = 2.0;
        let sys = SecondOrderSystem::new(KernelSpec::zero(), 0.0)
            .with_linear_drift(1.0)
            .with_heat_bath(1.0, beta);
        assert!(sys.satisfies_fluctuation_dissipation(beta));
        let mut s = ParticleState::from_scalars(&[0.0]).unwrap().with_zero_velocities();
        let mut rngs = StepRngs::new(4);
        let (mut m2, mut count) = (0.0, 0usize);
        for k in 0..2_000_000 {
            direct_step(&mut s, &sys, 0.01, &mut rngs).unwrap();
            if k >= 10_000 {
                m2 += s.positions()[0].powi(2);
                count += 1;
            }
        }
        let var = m2 / count as f64;
        assert!((var * beta - 1.0).abs() < 0.03, "{var}");
    }

    fn nh_state(v: Vec<f64>) -> ParticleState {
        let n = v.len();
        ParticleState::new(1, vec![0.0; n]).unwrap().with_velocities(v).unwrap()
    }

    #[test]
    fn nose_hoover_balanced_kinetic_energy_keeps_xi() {
        // Σ|p|² = 4 = dN/β with N = 4, d = 1, β = 1
        let mut s = nh_state(vec![1.0, -1.0, 1.0, -1.0]);
        let xi = nose_hoover_step(&mut s, 0.3, 2.0, 1.0, 0.01, &[0.0; 4]).unwrap();
        assert_eq!(xi, 0.3);
    }

    #[test]
    fn nose_hoover_hot_system_increases_xi() {
        let mut s = nh_state(vec![3.0, -3.0]);
        let xi = nose_hoover_step(&mut s, 0.0, 1.0, 1.0, 0.01, &[0.0; 2]).unwrap();
        assert!(xi > 0.0);
        let mut cold = nh_state(vec![0.1, 0.0]);
        assert!(nose_hoover_step(&mut cold, 0.0, 1.0, 1.0, 0.01, &[0.0; 2]).unwrap() < 0.0);
    }

    #[test]
    fn nose_hoover_is_deterministic() {
        let mut a = nh_state(vec![0.5, 1.5, -0.2]);
        let mut b = a.clone();
        let f = [0.1, -0.3, 0.2];
        let xa = nose_hoover_step(&mut a, 0.2, 1.0, 1.0, 0.01, &f).unwrap();
        let xb = nose_hoover_step(&mut b, 0.2, 1.0, 1.0, 0.01, &f).unwrap();
        assert_eq!(a, b);
        assert_eq!(xa, xb);
    }

    #[test]
    fn validates_parameters() {
        assert!(Thermostat::Andersen { nu: 0.0, temperature: 1.0 }.validate().is_err());
        assert!(Thermostat::Langevin { gamma: 1.0, beta: 2.0 }.validate().is_ok());
        assert_eq!(Thermostat::NoseHoover { q: 1.0, beta: 4.0, xi: 0.0 }.temperature(), 0.25);
    }
}
