//! Short-range `erfc(√α r)/r` part of the Ewald sum.

use std::f64::consts::PI;

use rbm_core::cell_list::CellList;
use statrs::function::erf::erfc;

use crate::error::Result;
use crate::params::EwaldParams;
use crate::system::PeriodicChargeSystem;

#[derive(Debug, Clone)]
pub struct RealSpaceResult {
    pub forces: Vec<f64>,
    /// `Σ_{i<j, r<r_c} q_i q_j erfc(√α r)/r`.
    pub energy: f64,
}

/// Pair force magnitude over `r` and the pair energy, for unit charges.
#[inline]
fn pair_terms(a: f64, r2: f64) -> (f64, f64) {
    let r = r2.sqrt();
    let ec = erfc(a * r);
    let gauss = 2.0 * a / PI.sqrt() * (-a * a * r2).exp();
    ((ec / r + gauss) / r2, ec / r)
}

/// Truncated real-space forces and energy using a cell list and the
/// minimum image. Each pair is evaluated once, so `F_ij = -F_ji` exactly.
pub fn real_space(system: &PeriodicChargeSystem, params: &EwaldParams) -> Result<RealSpaceResult> {
    params.validate(system.box_length())?;
    let cells = CellList::build(&system.state, params.r_c)?;
    let a = params.alpha.sqrt();
    let q = system.charges();
    let mut forces = vec![0.0; 3 * system.len()];
    let mut energy = 0.0;
    cells.for_each_pair(&system.state, |i, j, d, r2| {
        let qq = q[i] * q[j];
        if qq == 0.0 {
            return;
        }
        let (f_over_r, u) = pair_terms(a, r2);
        energy += qq * u;
        for c in 0..3 {
            let f = qq * f_over_r * d[c];
            forces[3 * i + c] += f;
            forces[3 * j + c] -= f;
        }
    });
    Ok(RealSpaceResult { forces, energy })
}

pub fn real_space_forces(system: &PeriodicChargeSystem, params: &EwaldParams) -> Result<Vec<f64>> {
    Ok(real_space(system, params)?.forces)
}

pub fn real_space_force(i: usize, system: &PeriodicChargeSystem, params: &EwaldParams) -> Result<[f64; 3]> {
    let f = real_space_forces(system, params)?;
    Ok([f[3 * i], f[3 * i + 1], f[3 * i + 2]])
}
