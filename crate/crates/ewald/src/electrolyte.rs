//! Primitive-model electrolyte: equal numbers of ±1 ions with a
//! Lennard-Jones core, in reduced units where the Coulomb potential is `q/r`.

use rand::Rng;
use rand_distr::StandardNormal;
use rbm_core::cell_list::CellList;
use rbm_core::ParticleState;

use crate::error::{Error, Result};
use crate::system::PeriodicChargeSystem;

/// Ion diameter of the electrolyte runs.
pub const ION_DIAMETER: f64 = 0.2;

/// Lennard-Jones pair interaction, truncated at `cutoff` and shifted so the
/// energy vanishes there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LennardJones {
    pub sigma: f64,
    pub epsilon: f64,
    pub cutoff: f64,
}

impl LennardJones {
    /// Standard truncation at `2.5σ`.
    pub fn new(sigma: f64, epsilon: f64) -> Self {
        Self {
            sigma,
            epsilon,
            cutoff: 2.5 * sigma,
        }
    }

    fn unshifted(&self, r2: f64) -> f64 {
        let s6 = (self.sigma * self.sigma / r2).powi(3);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    /// Pair energy at distance `r`.
    pub fn energy(&self, r: f64) -> f64 {
        if r >= self.cutoff {
            0.0
        } else {
            self.unshifted(r * r) - self.unshifted(self.cutoff * self.cutoff)
        }
    }

    /// `-φ'(r)/r` for `r < cutoff`.
    #[inline]
    fn force_over_r(&self, r2: f64) -> f64 {
        let s6 = (self.sigma * self.sigma / r2).powi(3);
        24.0 * self.epsilon * (2.0 * s6 * s6 - s6) / r2
    }

    /// Forces and total energy over all pairs (minimum image, cell list).
    pub fn forces_and_energy(&self, state: &ParticleState) -> Result<(Vec<f64>, f64)> {
        let cells = CellList::build(state, self.cutoff)?;
        let dim = state.dim();
        let shift = self.unshifted(self.cutoff * self.cutoff);
        let mut forces = vec![0.0; state.len() * dim];
        let mut energy = 0.0;
        cells.for_each_pair(state, |i, j, d, r2| {
            energy += self.unshifted(r2) - shift;
            let f = self.force_over_r(r2);
            for c in 0..dim {
                forces[i * dim + c] += f * d[c];
                forces[j * dim + c] -= f * d[c];
            }
        });
        Ok((forces, energy))
    }
}

/// `N/2` cations and `N/2` anions of unit charge in a cube of side `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectrolyteModel {
    pub n: usize,
    pub box_length: f64,
    pub lj: LennardJones,
    pub temperature: f64,
}

impl ElectrolyteModel {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "an electroneutral ±1 electrolyte needs an even N ≥ 2, got {n}"
            )));
        }
        if !(box_length > 2.0 * 2.5 * ION_DIAMETER) {
            return Err(Error::InvalidParameter(format!("box length {box_length} is too small")));
        }
        Ok(Self {
            n,
            box_length,
            lj: LennardJones::new(ION_DIAMETER, 1.0),
            temperature: 1.0,
        })
    }

    /// Box sized for reduced density `ρ_r = N/L³`.
    pub fn from_density(n: usize, density: f64) -> Result<Self> {
        if !(density > 0.0) {
            return Err(Error::InvalidParameter(format!("density must be positive, got {density}")));
        }
        Self::new(n, (n as f64 / density).cbrt())
    }

    /// `+1` for even indices, `-1` for odd ones.
    pub fn charges(&self) -> Vec<f64> {
        (0..self.n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
    }

    /// Uniform positions with no two ions closer than one diameter and
    /// Maxwell velocities at the model temperature with zero mean.
    pub fn initial_system<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PeriodicChargeSystem> {
        let l = self.box_length;
        let min2 = ION_DIAMETER * ION_DIAMETER;
        let mut xs: Vec<f64> = Vec::with_capacity(3 * self.n);
        let mut attempts = 0usize;
        while xs.len() < 3 * self.n {
            attempts += 1;
            if attempts > 1000 * self.n {
                return Err(Error::InvalidParameter("box too crowded to place ions".into()));
            }
            let trial = [rng.random::<f64>() * l, rng.random::<f64>() * l, rng.random::<f64>() * l];
            let clear = xs.chunks(3).all(|x| {
                let mut d = [x[0] - trial[0], x[1] - trial[1], x[2] - trial[2]];
                rbm_core::state::minimum_image(&mut d, l);
                d.iter().map(|v| v * v).sum::<f64>() >= min2
            });
            if clear {
                xs.extend_from_slice(&trial);
            }
        }
        let scale = self.temperature.sqrt();
        let mut vs: Vec<f64> = (0..3 * self.n)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for c in 0..3 {
            let mean = vs.iter().skip(c).step_by(3).sum::<f64>() / self.n as f64;
            for v in vs.iter_mut().skip(c).step_by(3) {
                *v -= mean;
            }
        }
        let state = ParticleState::new(3, xs)?.periodic(l)?.with_velocities(vs)?;
        PeriodicChargeSystem::new(state, self.charges())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbm_core::RngStream;

    #[test]
    fn lj_force_matches_energy_derivative() {
        let lj = LennardJones::new(0.2, 1.0);
        for &r in &[0.19, 0.22, 0.3, 0.45] {
            let h = 1e-6;
            let fd = -(lj.energy(r + h) - lj.energy(r - h)) / (2.0 * h);
            let f = lj.force_over_r(r * r) * r;
            assert!((f - fd).abs() < 1e-5 * (1.0 + f.abs()), "r={r}: {f} vs {fd}");
        }
        assert_eq!(lj.energy(0.5), 0.0);
        assert!(lj.energy(0.4999).abs() < 1e-3);
    }

    #[test]
    fn initial_state_is_neutral_and_spread_out() {
        let model = ElectrolyteModel::from_density(300, 0.3).unwrap();
        assert!((model.box_length - 10.0).abs() < 1e-12);
        let sys = model.initial_system(&mut RngStream::new(1, 4).rng()).unwrap();
        assert_eq!(sys.len(), 300);
        let v = sys.state.velocities().unwrap();
        for c in 0..3 {
            assert!(v.iter().skip(c).step_by(3).sum::<f64>().abs() < 1e-10);
        }
        let (forces, energy) = model.lj.forces_and_energy(&sys.state).unwrap();
        assert!(energy.is_finite() && energy < 300.0);
        for c in 0..3 {
            assert!(forces.iter().skip(c).step_by(3).sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_odd_particle_count() {
        assert!(ElectrolyteModel::new(7, 10.0).is_err());
    }
}
