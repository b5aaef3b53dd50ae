//! Reciprocal-lattice bookkeeping: the Gaussian lattice sum `S`, exact
//! frequency sets, structure factors and the offline frequency sampler.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::{erf, erfc};

use crate::system::PeriodicChargeSystem;

/// Integer frequency index `m`; the wave vector is `k = 2π m/L`.
pub type Frequency = [i32; 3];

pub fn wavevector(m: &Frequency, box_length: f64) -> [f64; 3] {
    let f = 2.0 * PI / box_length;
    [f * m[0] as f64, f * m[1] as f64, f * m[2] as f64]
}

/// Exponent `c` in the one-dimensional factor `exp(-c m²)` of `exp(-k²/4α)`.
fn gaussian_rate(alpha: f64, box_length: f64) -> f64 {
    PI * PI / (alpha * box_length * box_length)
}

/// `H - 1 = 2 Σ_{m≥1} exp(-π² m²/(α L²))`, summed until terms stop contributing.
fn lattice_excess(alpha: f64, box_length: f64) -> f64 {
    let c = gaussian_rate(alpha, box_length);
    let mut sum = 0.0;
    let mut m = 1.0f64;
    loop {
        let term = 2.0 * (-c * m * m).exp();
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            return sum;
        }
        m += 1.0;
    }
}

/// `H = Σ_{m∈ℤ} exp(-π² m²/(α L²))`.
pub fn lattice_factor(alpha: f64, box_length: f64) -> f64 {
    1.0 + lattice_excess(alpha, box_length)
}

/// `S = Σ_{k≠0} exp(-k²/4α) = H³ - 1`, the normaliser of the frequency
/// distribution.
pub fn sum_s(alpha: f64, box_length: f64) -> f64 {
    // (1 + e)³ - 1 expanded, so tiny excesses do not cancel away
    let e = lattice_excess(alpha, box_length);
    e * (3.0 + e * (3.0 + e))
}

/// Exact per-component second moment `E[m_c²]` of the discrete Gaussian
/// `∝ exp(-π²|m|²/(αL²))` on `ℤ³ \ {0}`.
pub fn discrete_gaussian_component_variance(alpha: f64, box_length: f64) -> f64 {
    let c = gaussian_rate(alpha, box_length);
    let h = lattice_factor(alpha, box_length);
    let mut second = 0.0;
    let mut m = 1.0f64;
    loop {
        let term = 2.0 * m * m * (-c * m * m).exp();
        second += term;
        if term < 1e-17 * second {
            break;
        }
        m += 1.0;
    }
    h * h * second / sum_s(alpha, box_length)
}

/// Frequencies `0 < |m| ≤ m_max` with one representative of each `±m`
/// pair (the lexicographically positive one).
pub fn half_space_frequencies(m_max: u32) -> Vec<Frequency> {
    let m = m_max as i32;
    let r2 = m * m;
    let mut out = Vec::new();
    for x in 0..=m {
        for y in -m..=m {
            for z in -m..=m {
                if x * x + y * y + z * z > r2 {
                    continue;
                }
                let positive = x > 0 || (x == 0 && (y > 0 || (y == 0 && z > 0)));
                if positive {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// `ρ(k) = Σ_i q_i exp(i k·r_i)`.
pub fn structure_factor(system: &PeriodicChargeSystem, k: &[f64; 3]) -> Complex64 {
    let mut rho = Complex64::new(0.0, 0.0);
    for (i, &q) in system.charges().iter().enumerate() {
        let r = system.position(i);
        let phase = k[0] * r[0] + k[1] * r[1] + k[2] * r[2];
        rho += q * Complex64::cis(phase);
    }
    rho
}

/// An ordered supply of frequencies drawn offline from the discrete
/// Gaussian `∝ exp(-k²/4α)` on `ℤ³ \ {0}` by an independence
/// Metropolis–Hastings chain. Batches are taken in order; when the supply
/// runs out the chain is continued with its own generator, so the whole
/// sequence depends only on the seed.
#[derive(Debug, Clone)]
pub struct KSampleBank {
    alpha: f64,
    box_length: f64,
    samples: Vec<Frequency>,
    cursor: usize,
    chain: FrequencyChain,
    refill_size: usize,
    refills: usize,
}

impl KSampleBank {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn samples(&self) -> &[Frequency] {
        &self.samples
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Unused samples left before the next refill.
    pub fn remaining(&self) -> usize {
        self.samples.len() - self.cursor
    }

    /// Number of times the chain has been continued.
    pub fn refills(&self) -> usize {
        self.refills
    }

    /// Fraction of accepted proposals so far.
    pub fn acceptance_rate(&self) -> f64 {
        self.chain.accepted as f64 / self.chain.proposed.max(1) as f64
    }

    /// The next `p` frequencies in order, extending the chain if needed.
    pub fn next_batch(&mut self, p: usize) -> &[Frequency] {
        if self.remaining() < p {
            self.samples.drain(..self.cursor);
            self.cursor = 0;
            let need = self.refill_size.max(p - self.samples.len());
            self.chain.extend(&mut self.samples, need);
            self.refills += 1;
        }
        let start = self.cursor;
        self.cursor += p;
        &self.samples[start..self.cursor]
    }
}

/// Draw `count` frequencies for splitting parameter `alpha` in a box of side
/// `box_length`. The generator is kept for later refills of the same size.
pub fn mh_sample_kvectors(alpha: f64, box_length: f64, count: usize, rng: ChaCha8Rng) -> KSampleBank {
    let mut chain = FrequencyChain::new(alpha, box_length, rng);
    let count = count.max(1);
    let mut samples = Vec::with_capacity(count);
    chain.extend(&mut samples, count);
    KSampleBank {
        alpha,
        box_length,
        samples,
        cursor: 0,
        chain,
        refill_size: count,
        refills: 0,
    }
}

/// Independence sampler whose proposal rounds each component of
/// `N(0, αL²/(2π²))` to the nearest integer; `m = 0` proposals are rejected.
#[derive(Debug, Clone)]
struct FrequencyChain {
    rate: f64,
    scale: f64,
    current: Frequency,
    log_weight: f64,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl FrequencyChain {
    fn new(alpha: f64, box_length: f64, rng: ChaCha8Rng) -> Self {
        let mut chain = Self {
            rate: gaussian_rate(alpha, box_length),
            scale: box_length * alpha.sqrt() / (PI * 2f64.sqrt()),
            current: [0; 3],
            log_weight: f64::NEG_INFINITY,
            rng,
            proposed: 0,
            accepted: 0,
        };
        // start from a proposal draw, which is already close to the target
        loop {
            let m = chain.propose();
            if m != [0; 3] {
                chain.log_weight = chain.log_weight_of(&m);
                chain.current = m;
                break;
            }
        }
        chain
    }

    fn propose(&mut self) -> Frequency {
        let mut m = [0; 3];
        for c in m.iter_mut() {
            let z: f64 = self.rng.sample(StandardNormal);
            *c = (self.scale * z).round() as i32;
        }
        m
    }

    /// `ln P(m)` of the rounded Gaussian proposal, one component.
    fn log_proposal(&self, m: i32) -> f64 {
        let w = std::f64::consts::SQRT_2 * self.scale;
        let a = m.unsigned_abs() as f64;
        let p = if m == 0 {
            erf(0.5 / w)
        } else {
            0.5 * (erfc((a - 0.5) / w) - erfc((a + 0.5) / w))
        };
        p.ln()
    }

    /// `ln(target/proposal)` up to a constant.
    fn log_weight_of(&self, m: &Frequency) -> f64 {
        m.iter()
            .map(|&c| -self.rate * (c as f64).powi(2) - self.log_proposal(c))
            .sum()
    }

    fn extend(&mut self, out: &mut Vec<Frequency>, count: usize) {
        for _ in 0..count {
            let m = self.propose();
            let u: f64 = self.rng.random();
            self.proposed += 1;
            if m != [0; 3] {
                let lw = self.log_weight_of(&m);
                if u.ln() < lw - self.log_weight {
                    self.current = m;
                    self.log_weight = lw;
                    self.accepted += 1;
                }
            }
            out.push(self.current);
        }
    }
}
