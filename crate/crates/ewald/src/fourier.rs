//! Fourier-space Ewald forces and energies: the exact truncated sum and the
//! random batch estimator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::kspace::{half_space_frequencies, wavevector, Frequency};
use crate::params::EwaldParams;
use crate::system::PeriodicChargeSystem;

/// Forces and the k-sum energy `(2π/V) Σ_{k≠0} |ρ(k)|² e^{-k²/4α}/k²`.
#[derive(Debug, Clone)]
pub struct FourierResult {
    pub forces: Vec<f64>,
    pub energy: f64,
}

/// Per-particle, per-axis tables of `exp(i 2π m x/L)` for `0 ≤ m ≤ m_max`.
struct PhaseTables {
    width: usize,
    table: Vec<Complex64>,
}

impl PhaseTables {
    fn new(system: &PeriodicChargeSystem, m_max: u32) -> Self {
        let width = m_max as usize + 1;
        let n = system.len();
        let f = 2.0 * PI / system.box_length();
        let mut table = vec![Complex64::new(1.0, 0.0); n * 3 * width];
        for i in 0..n {
            let r = system.position(i);
            for c in 0..3 {
                let base = (i * 3 + c) * width;
                let step = Complex64::cis(f * r[c]);
                for m in 1..width {
                    // direct evaluation every few entries keeps the recurrence error small
                    table[base + m] = if m % 8 == 0 {
                        Complex64::cis(f * m as f64 * r[c])
                    } else {
                        table[base + m - 1] * step
                    };
                }
            }
        }
        Self { width, table }
    }

    #[inline]
    fn axis(&self, i: usize, c: usize, m: i32) -> Complex64 {
        let z = self.table[(i * 3 + c) * self.width + m.unsigned_abs() as usize];
        if m < 0 {
            z.conj()
        } else {
            z
        }
    }

    #[inline]
    fn phase(&self, i: usize, m: &Frequency) -> Complex64 {
        self.axis(i, 0, m[0]) * self.axis(i, 1, m[1]) * self.axis(i, 2, m[2])
    }
}

/// Exact Fourier forces and energy over `0 < |m| ≤ params.m_max`.
pub fn fourier_exact(system: &PeriodicChargeSystem, params: &EwaldParams) -> FourierResult {
    exact_sum(system, params, true)
}

fn exact_sum(system: &PeriodicChargeSystem, params: &EwaldParams, with_forces: bool) -> FourierResult {
    let n = system.len();
    let l = system.box_length();
    let volume = system.volume();
    let q = system.charges();
    let tables = PhaseTables::new(system, params.m_max);
    let mut phases = vec![Complex64::new(0.0, 0.0); n];
    let mut forces = vec![0.0; if with_forces { 3 * n } else { 0 }];
    let mut energy = 0.0;
    for m in half_space_frequencies(params.m_max) {
        let k = wavevector(&m, l);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let g = (-k2 / (4.0 * params.alpha)).exp() / k2;
        let mut rho = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let e = tables.phase(i, &m);
            phases[i] = e;
            rho += q[i] * e;
        }
        // each half-space vector stands for the pair ±k
        energy += 2.0 * (2.0 * PI / volume) * g * rho.norm_sqr();
        if !with_forces {
            continue;
        }
        let coef = -2.0 * 4.0 * PI / volume * g;
        for i in 0..n {
            let e = phases[i];
            let im = e.re * rho.im - e.im * rho.re;
            let s = coef * q[i] * im;
            for c in 0..3 {
                forces[3 * i + c] += s * k[c];
            }
        }
    }
    FourierResult { forces, energy }
}

pub fn fourier_forces_exact(system: &PeriodicChargeSystem, params: &EwaldParams) -> Vec<f64> {
    fourier_exact(system, params).forces
}

/// Exact Fourier force on particle `i` (the structure factors cost as much
/// as all forces, so this is a convenience for tests and small systems).
pub fn fourier_force_exact(i: usize, system: &PeriodicChargeSystem, params: &EwaldParams) -> [f64; 3] {
    let f = fourier_forces_exact(system, params);
    [f[3 * i], f[3 * i + 1], f[3 * i + 2]]
}

/// Fourier part of `U1`, without the self term.
pub fn fourier_energy_exact(system: &PeriodicChargeSystem, params: &EwaldParams) -> f64 {
    exact_sum(system, params, false).energy
}

/// Self-interaction correction `-√(α/π) Σ q_i²`.
pub fn self_energy(system: &PeriodicChargeSystem, alpha: f64) -> f64 {
    -(alpha / PI).sqrt() * system.charges().iter().map(|q| q * q).sum::<f64>()
}

/// Random batch estimate of the Fourier forces from frequencies drawn
/// from `∝ exp(-k²/4α)`, with `s` the normaliser of that distribution.
/// The same batch is used for every particle.
pub fn rbe_forces(system: &PeriodicChargeSystem, batch: &[Frequency], s: f64) -> FourierResult {
    let n = system.len();
    let l = system.box_length();
    let volume = system.volume();
    let q = system.charges();
    let p = batch.len() as f64;
    let mut phases = vec![Complex64::new(0.0, 0.0); n];
    let mut forces = vec![0.0; 3 * n];
    let mut energy = 0.0;
    for m in batch {
        let k = wavevector(m, l);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let mut rho = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let r = system.position(i);
            let e = Complex64::cis(k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
            phases[i] = e;
            rho += q[i] * e;
        }
        energy += (2.0 * PI / volume) * (s / p) * rho.norm_sqr() / k2;
        let coef = -(s / p) * 4.0 * PI / (volume * k2);
        for i in 0..n {
            let e = phases[i];
            let im = e.re * rho.im - e.im * rho.re;
            let f = coef * q[i] * im;
            for c in 0..3 {
                forces[3 * i + c] += f * k[c];
            }
        }
    }
    FourierResult { forces, energy }
}

pub fn rbe_force(i: usize, system: &PeriodicChargeSystem, batch: &[Frequency], s: f64) -> [f64; 3] {
    let f = rbe_forces(system, batch, s).forces;
    [f[3 * i], f[3 * i + 1], f[3 * i + 2]]
}
