use rand::Rng;
use rand_distr::StandardNormal;

use crate::batch::{random_division, BatchDivision};
use crate::error::{Error, Result};
use crate::state::ParticleState;

/// Cucker–Smale flocking
/// `ẋ_i = v_i`, `v̇_i = (κ/(N-1)) Σ_{j≠i} ψ(|x_j - x_i|)(v_j - v_i)`
/// with communication weight `ψ(r) = (1 + r²)^{-β/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuckerSmaleModel {
    pub kappa: f64,
    pub beta: f64,
}

impl Default for CuckerSmaleModel {
    fn default() -> Self {
        Self { kappa: 1.0, beta: 0.4 }
    }
}

impl CuckerSmaleModel {
    pub fn new(kappa: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) || !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need κ ≥ 0 and β ∈ [0, 1), got κ={kappa} β={beta}"
            )));
        }
        Ok(Self { kappa, beta })
    }

    pub fn psi(&self, r: f64) -> f64 {
        (1.0 + r * r).powf(-0.5 * self.beta)
    }

    /// Gaussian positions and velocities (standard normal components).
    pub fn initial_state<R: Rng + ?Sized>(&self, n: usize, dim: usize, rng: &mut R) -> ParticleState {
        let x: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
        ParticleState::new(dim, x)
            .and_then(|s| s.with_velocities(v))
            .expect("consistent shapes")
    }

    fn accumulate(&self, state: &ParticleState, i: usize, partners: &[usize], scale: f64, out: &mut [f64]) {
        let dim = state.dim();
        let vel = state.velocities().expect("velocities checked");
        let xi = state.position(i);
        let vi = &vel[i * dim..(i + 1) * dim];
        for &j in partners {
            if j == i {
                continue;
            }
            let xj = state.position(j);
            let r2: f64 = (0..dim).map(|c| (xj[c] - xi[c]).powi(2)).sum();
            let w = scale * self.psi(r2.sqrt());
            for c in 0..dim {
                out[c] += w * (vel[j * dim + c] - vi[c]);
            }
        }
    }

    /// Full velocity derivatives (N×d).
    pub fn rhs(&self, state: &ParticleState) -> Result<Vec<f64>> {
        let (n, dim) = (state.len(), state.dim());
        if state.velocities().is_none() {
            return Err(Error::MissingVelocities);
        }
        let all: Vec<usize> = (0..n).collect();
        let scale = self.kappa / (n - 1) as f64;
        let mut out = vec![0.0; n * dim];
        for i in 0..n {
            self.accumulate(state, i, &all, scale, &mut out[i * dim..(i + 1) * dim]);
        }
        Ok(out)
    }

    /// Velocity derivatives with the sum restricted to each particle's batch
    /// and the prefactor `κ/(p-1)`.
    pub fn rhs_batched(&self, state: &ParticleState, division: &BatchDivision) -> Result<Vec<f64>> {
        let (n, dim) = (state.len(), state.dim());
        if state.velocities().is_none() {
            return Err(Error::MissingVelocities);
        }
        let mut out = vec![0.0; n * dim];
        for batch in division.batches() {
            let scale = self.kappa / (batch.len() - 1) as f64;
            for &i in batch {
                self.accumulate(state, i, batch, scale, &mut out[i * dim..(i + 1) * dim]);
            }
        }
        Ok(out)
    }

    /// One explicit Euler step; `p = None` uses the full sum, `Some(p)` a
    /// fresh random division.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut ParticleState,
        p: Option<usize>,
        dt: f64,
        rng: &mut R,
    ) -> Result<()> {
        let accel = match p {
            None => self.rhs(state)?,
            Some(p) => {
                let division = random_division(state.len(), p, rng)?;
                self.rhs_batched(state, &division)?
            }
        };
        let (pos, vel) = state.phase_mut()?;
        for k in 0..pos.len() {
            pos[k] += vel[k] * dt;
            vel[k] += accel[k] * dt;
        }
        state.time += dt;
        state.check_finite()
    }
}

/// `((1/N²) Σ_{i,j} |x_i - x_j|², (1/N²) Σ_{i,j} |v_i - v_j|²)`, computed as
/// twice the centred second moments. The velocity spread is zero without
/// velocities.
pub fn flocking_functionals(state: &ParticleState) -> (f64, f64) {
    let dim = state.dim();
    let x = spread(state.positions(), dim);
    let v = state.velocities().map_or(0.0, |v| spread(v, dim));
    (x, v)
}

fn spread(rows: &[f64], dim: usize) -> f64 {
    let n = (rows.len() / dim) as f64;
    let mut total = 0.0;
    for c in 0..dim {
        let mean = rows.iter().skip(c).step_by(dim).sum::<f64>() / n;
        total += rows.iter().skip(c).step_by(dim).map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    }
    2.0 * total
}
