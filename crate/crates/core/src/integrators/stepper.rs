use rand::Rng;
use rand_distr::StandardNormal;

use super::system::{FirstOrderSystem, NoiseMode, SecondOrderSystem, System};
use crate::batch::{random_division, sample_batch_with_replacement};
use crate::error::{Error, Result};
use crate::forces::{add_short_range_forces, batch_forces, batch_prefactor, full_forces, pair_sum, KernelPart};
use crate::kernel::KernelSpec;
use crate::rng::StepRngs;
use crate::state::{wrap_coordinate, ParticleState};

/// Interaction-force evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Full O(N²) sums.
    Direct,
    /// One random division per step.
    Rbm { p: usize },
    /// `⌈N/p⌉` sequential updates of random `p`-subsets per step.
    RbmR { p: usize },
    /// Exact short-range part via a cell list, random batches for the smooth part.
    RbmSplit { p: usize },
}

/// Side information produced by one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Singular-kernel evaluations that were clamped during the step.
    pub clamps: u64,
    /// Per-particle update counts (filled by the RBM-r stepper only).
    pub updates: Vec<u32>,
}

/// Interaction forces on all particles (N×d) for one step of `method`.
///
/// `RbmR` has no single force field per step and is rejected here.
pub fn interaction_forces<R: Rng + ?Sized>(
    state: &ParticleState,
    kernel: &KernelSpec,
    alpha_n: f64,
    method: Method,
    division_rng: &mut R,
) -> Result<Vec<f64>> {
    let n = state.len();
    match method {
        Method::Direct => Ok(full_forces(state, kernel, KernelPart::Full, alpha_n)),
        Method::Rbm { p } => {
            let division = random_division(n, p, division_rng)?;
            Ok(batch_forces(state, &division, kernel, KernelPart::Full, alpha_n))
        }
        Method::RbmSplit { p } => {
            let r0 = kernel
                .split_radius()
                .ok_or_else(|| Error::InvalidParameter("splitting requires a split kernel".into()))?;
            if state.box_length().is_none() {
                return Err(Error::NotPeriodic);
            }
            let division = random_division(n, p, division_rng)?;
            let mut forces = batch_forces(state, &division, kernel, KernelPart::Smooth, alpha_n);
            add_short_range_forces(state, kernel, r0, alpha_n, &mut forces)?;
            Ok(forces)
        }
        Method::RbmR { .. } => Err(Error::InvalidParameter(
            "RBM-r updates subsets sequentially and has no per-step force field".into(),
        )),
    }
}

/// One Euler–Maruyama step with exact O(N²) interaction forces.
pub fn direct_step<'a>(
    state: &mut ParticleState,
    system: impl Into<System<'a>>,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    step(state, system.into(), Method::Direct, dt, rngs)
}

/// One step of the random batch method for a first-order system.
pub fn rbm_step_first_order(
    state: &mut ParticleState,
    system: &FirstOrderSystem,
    p: usize,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    step(state, System::First(system), Method::Rbm { p }, dt, rngs)
}

/// One step of the random batch method for a second-order system.
pub fn rbm_step_second_order(
    state: &mut ParticleState,
    system: &SecondOrderSystem,
    p: usize,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    step(state, System::Second(system), Method::Rbm { p }, dt, rngs)
}

/// One outer step of RBM with replacement.
pub fn rbmr_step<'a>(
    state: &mut ParticleState,
    system: impl Into<System<'a>>,
    p: usize,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    step(state, system.into(), Method::RbmR { p }, dt, rngs)
}

/// One step of RBM with kernel splitting.
pub fn rbm_split_step<'a>(
    state: &mut ParticleState,
    system: impl Into<System<'a>>,
    p: usize,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    step(state, system.into(), Method::RbmSplit { p }, dt, rngs)
}

/// Advance `state` by `dt` with the given force method.
pub fn step(
    state: &mut ParticleState,
    system: System<'_>,
    method: Method,
    dt: f64,
    rngs: &mut StepRngs,
) -> Result<StepReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let n = state.len();
    match system {
        System::First(s) => s.validate()?,
        System::Second(s) => {
            s.validate(n)?;
            if state.velocities().is_none() {
                return Err(Error::MissingVelocities);
            }
        }
    }
    let kernel = system.kernel();
    let clamps_before = kernel.clamp_count();
    let mut report = StepReport::default();

    match method {
        Method::RbmR { p } => {
            let loops = n.div_ceil(p);
            let mut counts = vec![0u32; n];
            let scale = batch_prefactor(system.alpha_n(), n, p);
            let dim = state.dim();
            let mut forces = vec![0.0; p * dim];
            for _ in 0..loops {
                let picked = sample_batch_with_replacement(n, p, &mut rngs.division)?;
                for (row, &i) in forces.chunks_mut(dim).zip(&picked) {
                    pair_sum(state, i, picked.iter().copied(), kernel, KernelPart::Full, row);
                    row.iter_mut().for_each(|v| *v *= scale);
                    counts[i] += 1;
                }
                advance(state, system, &picked, &forces, dt, &mut rngs.noise);
            }
            report.updates = counts;
        }
        _ => {
            let forces = interaction_forces(state, kernel, system.alpha_n(), method, &mut rngs.division)?;
            let all: Vec<usize> = (0..n).collect();
            advance(state, system, &all, &forces, dt, &mut rngs.noise);
        }
    }

    state.time += dt;
    report.clamps = kernel.clamp_count() - clamps_before;
    state.check_finite()?;
    Ok(report)
}

/// Euler–Maruyama update of `members`, whose interaction forces are the
/// consecutive rows of `forces`. Noise is drawn per member in order.
///
/// Second-order systems update the velocity first and move with the new
/// velocity (semi-implicit Euler), which keeps Hamiltonian parts stable.
fn advance<R: Rng + ?Sized>(
    state: &mut ParticleState,
    system: System<'_>,
    members: &[usize],
    forces: &[f64],
    dt: f64,
    rng: &mut R,
) {
    let dim = state.dim();
    let box_length = state.box_length();
    let sqrt_dt = dt.sqrt();
    let mut b = [0.0; 8];
    let b = &mut b[..dim];
    let mut g = [0.0; 8];
    let g = &mut g[..dim];

    match system {
        System::First(s) => {
            for (&i, f) in members.iter().zip(forces.chunks(dim)) {
                let x = state.position_mut(i);
                eval_drift(&s.drift, x, b);
                let noisy = s.sigma > 0.0;
                if noisy {
                    match &s.noise {
                        NoiseMode::Additive => g.fill(1.0),
                        NoiseMode::Multiplicative(amp) => amp(x, g),
                    }
                }
                for c in 0..dim {
                    let mut dx = (b[c] + f[c]) * dt;
                    if noisy {
                        let z: f64 = rng.sample(StandardNormal);
                        dx += s.sigma * g[c] * sqrt_dt * z;
                    }
                    x[c] += dx;
                    if let Some(l) = box_length {
                        x[c] = wrap_coordinate(x[c], l);
                    }
                }
            }
        }
        System::Second(s) => {
            let (pos, vel) = state.phase_mut().expect("velocities checked");
            for (&i, f) in members.iter().zip(forces.chunks(dim)) {
                let m = s.mass(i);
                let x = &mut pos[i * dim..(i + 1) * dim];
                let v = &mut vel[i * dim..(i + 1) * dim];
                eval_drift(&s.drift, x, b);
                for c in 0..dim {
                    let mut dv = (b[c] + f[c] - s.gamma * v[c]) / m * dt;
                    if s.sigma > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        dv += s.sigma / m * sqrt_dt * z;
                    }
                    v[c] += dv;
                    x[c] += v[c] * dt;
                    if let Some(l) = box_length {
                        x[c] = wrap_coordinate(x[c], l);
                    }
                }
            }
        }
    }
}

#[inline]
fn eval_drift(drift: &Option<crate::kernel::VectorField>, x: &[f64], out: &mut [f64]) {
    match drift {
        Some(b) => b(x, out),
        None => out.fill(0.0),
    }
}
