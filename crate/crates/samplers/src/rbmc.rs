//! Random batch Monte Carlo: overdamped Langevin proposals driven by the
//! smooth pair part on random mini-batches, corrected by a Metropolis step
//! on the short-range part.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rbm_core::integrators::StepSchedule;
use rbm_core::rng::{streams, RngStream};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::GibbsTarget;

/// How the candidate position is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposal {
    /// `m` Euler–Maruyama steps with mini-batched `φ1` forces.
    EulerMaruyama,
    /// Exact transition of the proposal dynamics over `Σ Δt_k`; needs a
    /// harmonic `V` and no smooth pair part.
    ExactHarmonic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbmcConfig {
    /// Inner Euler–Maruyama steps per proposal.
    pub inner_steps: usize,
    /// Batch size `p`: each inner step uses `p - 1` other particles.
    pub batch_size: usize,
    pub schedule: StepSchedule,
    pub proposal: Proposal,
    /// Drop the Brownian term (deterministic proposals for testing).
    pub noise: bool,
    /// Record `H` every this many sweeps.
    pub energy_every: Option<u64>,
}

impl Default for RbmcConfig {
    fn default() -> Self {
        Self {
            inner_steps: 5,
            batch_size: 2,
            schedule: StepSchedule::Constant(1e-4),
            proposal: Proposal::EulerMaruyama,
            noise: true,
            energy_every: None,
        }
    }
}

impl RbmcConfig {
    pub fn validate(&self, target: &GibbsTarget) -> Result<()> {
        self.schedule.validate()?;
        if self.inner_steps == 0 {
            return Err(Error::InvalidParameter("need at least one inner step".into()));
        }
        if target.n >= 2 && self.batch_size < 2 {
            return Err(rbm_core::Error::BatchTooSmall(self.batch_size).into());
        }
        if target.n >= 2 && self.batch_size > target.n {
            return Err(rbm_core::Error::BatchTooLarge {
                p: self.batch_size,
                n: target.n,
            }
            .into());
        }
        if self.proposal == Proposal::ExactHarmonic
            && (target.harmonic_constant().is_none() || target.smooth().is_some())
        {
            return Err(Error::InvalidParameter(
                "exact proposals need a harmonic potential and no smooth pair part".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MarkovChainStats {
    pub accepted: u64,
    pub proposed: u64,
    /// Proposals rejected because they left the finite numbers.
    pub non_finite: u64,
    /// `H` at recorded sweeps.
    pub energy_trace: Vec<f64>,
}

impl MarkovChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// `N - 1`, or 1 for a single particle (plain Langevin on `V`).
fn others(target: &GibbsTarget) -> f64 {
    target.n.saturating_sub(1).max(1) as f64
}

/// Candidate position for particle `i` with all others frozen, or `None`
/// if it is not finite.
pub fn rbmc_propose<R: Rng + ?Sized, S: Rng + ?Sized>(
    i: usize,
    positions: &[f64],
    target: &GibbsTarget,
    config: &RbmcConfig,
    batch_rng: &mut R,
    noise_rng: &mut S,
) -> Option<Vec<f64>> {
    let mut r = [0.0; 3];
    let d = target.dim;
    propose_into(i, positions, target, config, batch_rng, noise_rng, &mut r[..d]).then(|| r[..d].to_vec())
}

/// Writes the candidate into `r`; false if it is not finite.
fn propose_into<R: Rng + ?Sized, S: Rng + ?Sized>(
    i: usize,
    positions: &[f64],
    target: &GibbsTarget,
    config: &RbmcConfig,
    batch_rng: &mut R,
    noise_rng: &mut S,
    r: &mut [f64],
) -> bool {
    let d = target.dim;
    let n = positions.len() / d;
    let nm1 = others(target);
    let w = target.w;
    let diffusion = 1.0 / (nm1 * w * w * target.beta);
    r.copy_from_slice(&positions[i * d..(i + 1) * d]);

    if config.proposal == Proposal::ExactHarmonic {
        let c = target.harmonic_constant().expect("validated");
        let a = c / (w * nm1);
        let t: f64 = (1..=config.inner_steps).map(|k| config.schedule.step(k)).sum();
        let decay = (-a * t).exp();
        let sd = (diffusion * -(-2.0 * a * t).exp_m1() / a).sqrt();
        for x in r.iter_mut() {
            *x *= decay;
            if config.noise {
                let z: f64 = noise_rng.sample(StandardNormal);
                *x += sd * z;
            }
        }
        return r.iter().all(|x| x.is_finite());
    }

    let p = config.batch_size.min(n);
    let mut grad_v = [0.0; 3];
    let mut pair = [0.0; 3];
    let mut batch_force = [0.0; 3];
    let mut diff = [0.0; 3];
    for k in 1..=config.inner_steps {
        let dt = config.schedule.step(k);
        target.potential_grad(r, &mut grad_v[..d]);
        batch_force[..d].fill(0.0);
        if let (Some(smooth), true) = (target.smooth(), n >= 2 && p >= 2) {
            let mut add = |j: usize| {
                let j = if j >= i { j + 1 } else { j };
                for c in 0..d {
                    diff[c] = r[c] - positions[j * d + c];
                }
                (smooth.grad)(&diff[..d], &mut pair[..d]);
                for c in 0..d {
                    batch_force[c] += pair[c];
                }
            };
            if p == 2 {
                add(batch_rng.random_range(0..n - 1));
            } else {
                index::sample(batch_rng, n - 1, p - 1).iter().for_each(add);
            }
            let scale = 1.0 / (p - 1) as f64;
            for f in batch_force[..d].iter_mut() {
                *f *= scale;
            }
        }
        let amp = (2.0 * dt * diffusion).sqrt();
        for c in 0..d {
            r[c] -= dt * (grad_v[c] / (w * nm1) + batch_force[c]);
            if config.noise {
                let z: f64 = noise_rng.sample(StandardNormal);
                r[c] += amp * z;
            }
        }
    }
    r.iter().all(|x| x.is_finite())
}

/// Uniform grid with cells no smaller than the short-range cutoff, over a
/// window around the initial configuration; particles that leave the window
/// go to an overflow list that every query scans.
#[derive(Debug, Clone)]
pub struct ShortRangeGrid {
    dim: usize,
    cell: f64,
    lo: [f64; 3],
    counts: [usize; 3],
    cells: Vec<Vec<usize>>,
    outside: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl ShortRangeGrid {
    const MAX_CELLS: usize = 1 << 20;

    pub fn new(positions: &[f64], dim: usize, cutoff: f64) -> Self {
        let n = positions.len() / dim;
        let mut lo = [0.0; 3];
        let mut counts = [1usize; 3];
        let mut cell = cutoff;
        let mut span = [0.0; 3];
        for c in 0..dim {
            let (a, b) = positions
                .iter()
                .skip(c)
                .step_by(dim)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let width = (b - a).max(cutoff);
            lo[c] = a - width;
            span[c] = 3.0 * width;
        }
        loop {
            let mut total = 1usize;
            for c in 0..dim {
                counts[c] = ((span[c] / cell).ceil() as usize).max(1);
                total = total.saturating_mul(counts[c]);
            }
            if total <= Self::MAX_CELLS {
                break;
            }
            cell *= 2.0;
        }
        let total: usize = counts[..dim].iter().product();
        let mut grid = Self {
            dim,
            cell,
            lo,
            counts,
            cells: vec![Vec::new(); total],
            outside: Vec::new(),
            slot: vec![None; n],
        };
        for i in 0..n {
            grid.insert(i, &positions[i * dim..(i + 1) * dim]);
        }
        grid
    }

    fn coords(&self, x: &[f64]) -> Option<[usize; 3]> {
        let mut k = [0usize; 3];
        for c in 0..self.dim {
            let f = (x[c] - self.lo[c]) / self.cell;
            // truncation is floor on the accepted range
            if !(f >= 0.0 && f < self.counts[c] as f64) {
                return None;
            }
            k[c] = f as usize;
        }
        Some(k)
    }

    fn flat(&self, k: &[usize; 3]) -> usize {
        let mut idx = 0;
        for c in 0..self.dim {
            idx = idx * self.counts[c] + k[c];
        }
        idx
    }

    fn insert(&mut self, i: usize, x: &[f64]) {
        match self.coords(x) {
            Some(k) => {
                let s = self.flat(&k);
                self.cells[s].push(i);
                self.slot[i] = Some(s);
            }
            None => {
                self.outside.push(i);
                self.slot[i] = None;
            }
        }
    }

    fn remove(&mut self, i: usize) {
        let list = match self.slot[i] {
            Some(s) => &mut self.cells[s],
            None => &mut self.outside,
        };
        let at = list.iter().position(|&j| j == i).expect("particle is registered");
        list.swap_remove(at);
    }

    pub fn move_particle(&mut self, i: usize, x: &[f64]) {
        self.remove(i);
        self.insert(i, x);
    }

    /// Visit every particle registered in the cells around `x` (a superset
    /// of those within one cell edge), and every particle outside the grid.
    pub fn for_each_near<F: FnMut(usize)>(&self, x: &[f64], mut visit: F) {
        for &j in &self.outside {
            visit(j);
        }
        let Some(home) = self.coords(x) else {
            // query point outside the window: only overflow particles can be near
            // if the window has a margin of at least one cell; scan cells on the edge
            for list in &self.cells {
                for &j in list {
                    visit(j);
                }
            }
            return;
        };
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for c in 0..self.dim {
            lo[c] = home[c].saturating_sub(1);
            hi[c] = (home[c] + 1).min(self.counts[c] - 1);
        }
        let mut k = [0usize; 3];
        for a in lo[0]..=hi[0] {
            k[0] = a;
            for b in lo[1]..=hi[1] {
                k[1] = b;
                for e in lo[2]..=hi[2] {
                    k[2] = e;
                    for &j in &self.cells[self.flat(&k)] {
                        visit(j);
                    }
                }
            }
        }
    }
}

/// Σ_j w² φ2(|x - x_j|) over `j ≠ i`.
fn short_energy(i: usize, x: &[f64], positions: &[f64], target: &GibbsTarget, grid: Option<&ShortRangeGrid>) -> f64 {
    let d = target.dim;
    let w2 = target.w * target.w;
    let Some(short) = target.short() else {
        return 0.0;
    };
    let cut2 = short.cutoff * short.cutoff;
    let mut e = 0.0;
    let mut term = |j: usize| {
        if j == i {
            return;
        }
        let r2: f64 = (0..d).map(|c| (x[c] - positions[j * d + c]).powi(2)).sum();
        if r2 < cut2 {
            e += w2 * (short.value)(r2.sqrt());
        }
    };
    match grid {
        Some(g) => g.for_each_near(x, &mut term),
        None => (0..positions.len() / d).for_each(term),
    }
    e
}

/// Metropolis decision on the short-range part: accept with probability
/// `min{1, exp(-β Σ_j w²(φ2(x* - x_j) - φ2(x - x_j)))}`.
pub fn rbmc_accept<R: Rng + ?Sized>(
    i: usize,
    old: &[f64],
    candidate: &[f64],
    positions: &[f64],
    target: &GibbsTarget,
    grid: Option<&ShortRangeGrid>,
    rng: &mut R,
) -> bool {
    if target.short().is_none() || old == candidate {
        return true;
    }
    let delta = short_energy(i, candidate, positions, target, grid) - short_energy(i, old, positions, target, grid);
    if delta <= 0.0 {
        return true;
    }
    let u: f64 = rng.random();
    u < (-target.beta * delta).exp()
}

/// A single RBMC chain with its own generators.
pub struct RbmcChain {
    target: GibbsTarget,
    config: RbmcConfig,
    positions: Vec<f64>,
    grid: Option<ShortRangeGrid>,
    stats: MarkovChainStats,
    pick: ChaCha8Rng,
    batch: ChaCha8Rng,
    noise: ChaCha8Rng,
    accept: ChaCha8Rng,
    iterations: u64,
}

impl RbmcChain {
    pub fn new(target: GibbsTarget, config: RbmcConfig, initial: Vec<f64>, seed: u64, replica: u64) -> Result<Self> {
        config.validate(&target)?;
        if initial.len() != target.n * target.dim {
            return Err(rbm_core::Error::Shape(format!(
                "{} coordinates for {} particles in {} dimensions",
                initial.len(),
                target.n,
                target.dim
            ))
            .into());
        }
        let grid = target
            .short()
            .map(|s| ShortRangeGrid::new(&initial, target.dim, s.cutoff));
        let stream = |s| RngStream::for_replica(seed, replica, s).rng();
        Ok(Self {
            target,
            config,
            positions: initial,
            grid,
            stats: MarkovChainStats::default(),
            pick: stream(streams::PICK),
            batch: stream(streams::DIVISION),
            noise: stream(streams::NOISE),
            accept: stream(streams::ACCEPT),
            iterations: 0,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn stats(&self) -> &MarkovChainStats {
        &self.stats
    }

    pub fn target(&self) -> &GibbsTarget {
        &self.target
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// One iteration: pick a particle, propose, accept or reject.
    /// Returns whether the move was accepted.
    pub fn step(&mut self) -> bool {
        let d = self.target.dim;
        let i = self.pick.random_range(0..self.target.n);
        self.iterations += 1;
        self.stats.proposed += 1;
        let mut buf = [0.0; 3];
        let candidate = &mut buf[..d];
        if !propose_into(
            i,
            &self.positions,
            &self.target,
            &self.config,
            &mut self.batch,
            &mut self.noise,
            candidate,
        ) {
            self.stats.non_finite += 1;
            return false;
        }
        let candidate = &*candidate;
        let old = &self.positions[i * d..(i + 1) * d];
        let accepted = rbmc_accept(
            i,
            old,
            candidate,
            &self.positions,
            &self.target,
            self.grid.as_ref(),
            &mut self.accept,
        );
        if accepted {
            self.positions[i * d..(i + 1) * d].copy_from_slice(candidate);
            if let Some(g) = self.grid.as_mut() {
                g.move_particle(i, candidate);
            }
            self.stats.accepted += 1;
        }
        accepted
    }

    /// `N` iterations; records the energy when the sweep count is a
    /// multiple of the configured interval.
    pub fn sweep(&mut self) {
        for _ in 0..self.target.n {
            self.step();
        }
        if let Some(every) = self.config.energy_every {
            let sweeps = self.iterations / self.target.n as u64;
            if every > 0 && sweeps.is_multiple_of(every) {
                let h = self.target.energy(&self.positions);
                self.stats.energy_trace.push(h);
            }
        }
    }
}

/// One iteration of `chain`.
pub fn rbmc_step(chain: &mut RbmcChain) -> bool {
    chain.step()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{ShortRangePair, SmoothPair};
    use std::sync::Arc;

    fn free_target(n: usize) -> GibbsTarget {
        GibbsTarget::new(1, n, 1.0, 1.0, Arc::new(|_| 0.0), Arc::new(|_, out| out.fill(0.0))).unwrap()
    }

    #[test]
    fn brownian_proposal_variance() {
        let t = free_target(5);
        let config = RbmcConfig {
            inner_steps: 4,
            schedule: StepSchedule::Constant(0.01),
            ..Default::default()
        };
        let pos = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let mut b = RngStream::new(1, 0).rng();
        let mut z = RngStream::new(1, 1).rng();
        let draws = 100_000;
        let mut s2 = 0.0;
        for _ in 0..draws {
            let c = rbmc_propose(2, &pos, &t, &config, &mut b, &mut z).unwrap();
            s2 += (c[0] - 2.0).powi(2);
        }
        // 4 steps of variance 2Δt/(N-1)
        let expect = 4.0 * 2.0 * 0.01 / 4.0;
        assert!((s2 / draws as f64 / expect - 1.0).abs() < 0.02);
    }

    #[test]
    fn full_batch_without_noise_is_one_euler_step() {
        let (smooth, _) = crate::gibbs::log_split(0.1).unwrap();
        let t = GibbsTarget::harmonic(1, 3, 1.0, 1.0, 2.0).unwrap().with_smooth_pair(smooth);
        let config = RbmcConfig {
            inner_steps: 1,
            batch_size: 3,
            schedule: StepSchedule::Constant(0.05),
            noise: false,
            ..Default::default()
        };
        let pos = vec![0.3, -0.5, 1.0];
        let mut b = RngStream::new(1, 0).rng();
        let mut z = RngStream::new(1, 1).rng();
        let c = rbmc_propose(0, &pos, &t, &config, &mut b, &mut z).unwrap();
        // ∇V/(w(N-1)) = 2·0.3/2, φ1' = -1/r for r ≥ 0.1
        let grad_phi = -1.0 / 0.8 + -1.0 / (0.3 - 1.0);
        let expect = 0.3 - 0.05 * (0.3 + grad_phi / 2.0);
        assert!((c[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn candidate_mean_matches_one_step_drift() {
        // d=1, N=3, V=x²/2, φ1 smooth, p=2: the batch picks one of the two
        // others uniformly
        let (smooth, _) = crate::gibbs::log_split(0.1).unwrap();
        let t = GibbsTarget::harmonic(1, 3, 1.0, 1.0, 1.0).unwrap().with_smooth_pair(smooth);
        let dt = 0.01;
        let config = RbmcConfig {
            inner_steps: 1,
            batch_size: 2,
            schedule: StepSchedule::Constant(dt),
            ..Default::default()
        };
        let pos = vec![0.2, -0.4, 0.9];
        let mut b = RngStream::new(2, 0).rng();
        let mut z = RngStream::new(2, 1).rng();
        let draws = 100_000;
        let mut xs = Vec::with_capacity(draws);
        for _ in 0..draws {
            xs.push(rbmc_propose(0, &pos, &t, &config, &mut b, &mut z).unwrap()[0]);
        }
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let avg_grad = 0.5 * (-1.0 / 0.6 + -1.0 / (0.2 - 0.9));
        let expect = 0.2 - dt * (0.2 / 2.0 + avg_grad);
        let se = (var / draws as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "{mean} vs {expect} (se {se})");
    }

    fn coulomb_pair() -> GibbsTarget {
        free_target(2)
            .with_short_range(ShortRangePair {
                value: Arc::new(|r| 1.0 / r),
                cutoff: 10.0,
            })
            .unwrap()
    }

    #[test]
    fn acceptance_probability_example() {
        let t = coulomb_pair();
        let pos = vec![0.0, 1.0];
        let mut rng = RngStream::new(5, 0).rng();
        let trials = 200_000;
        let accepted = (0..trials)
            .filter(|_| rbmc_accept(1, &[1.0], &[0.5], &pos, &t, None, &mut rng))
            .count();
        let f = accepted as f64 / trials as f64;
        let expect = (-1.0f64).exp();
        assert!((f - expect).abs() < 4.0 * (expect * (1.0 - expect) / trials as f64).sqrt(), "{f}");
    }

    #[test]
    fn trivial_acceptances() {
        let t = coulomb_pair();
        let mut rng = RngStream::new(5, 0).rng();
        assert!(rbmc_accept(1, &[1.0], &[1.0], &[0.0, 1.0], &t, None, &mut rng));
        let free = free_target(2);
        assert!(rbmc_accept(1, &[1.0], &[0.001], &[0.0, 1.0], &free, None, &mut rng));
    }

    #[test]
    fn grid_finds_all_short_range_neighbours() {
        let mut rng = RngStream::new(3, 0).rng();
        for dim in 1..=3 {
            let n = 200;
            let pos: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let cutoff = 0.15;
            let mut grid = ShortRangeGrid::new(&pos, dim, cutoff);
            let mut moved = pos.clone();
            // push some particles out of the window
            for i in 0..5 {
                moved[i * dim] = 10.0 + i as f64;
                grid.move_particle(i, &moved[i * dim..(i + 1) * dim]);
            }
            for q in 0..50 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.4 - 1.2).collect();
                let x = if q == 0 { vec![10.0; dim] } else { x };
                let mut seen = vec![false; n];
                grid.for_each_near(&x, |j| seen[j] = true);
                for j in 0..n {
                    let r2: f64 = (0..dim).map(|c| (x[c] - moved[j * dim + c]).powi(2)).sum();
                    if r2 < cutoff * cutoff {
                        assert!(seen[j], "dim {dim}: missed {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_particle_is_unadjusted_langevin() {
        let t = GibbsTarget::harmonic(1, 1, 1.0, 1.0, 1.0).unwrap();
        let config = RbmcConfig {
            inner_steps: 1,
            batch_size: 2,
            schedule: StepSchedule::Constant(0.01),
            ..Default::default()
        };
        let mut chain = RbmcChain::new(t, config, vec![0.0], 9, 0).unwrap();
        let mut s2 = 0.0;
        let iters = 400_000;
        for _ in 0..iters {
            assert!(chain.step());
            s2 += chain.positions()[0].powi(2);
        }
        // the Euler chain for an OU process has stationary variance 1/(1 - Δt/2)
        let expect = 1.0 / (1.0 - 0.005);
        assert!((s2 / iters as f64 / expect - 1.0).abs() < 0.05);
    }

    #[test]
    fn exact_proposals_need_harmonic_target() {
        let t = free_target(3).with_smooth_pair(SmoothPair {
            value: Arc::new(|_| 0.0),
            grad: Arc::new(|_, o| o.fill(0.0)),
        });
        let config = RbmcConfig {
            proposal: Proposal::ExactHarmonic,
            ..Default::default()
        };
        assert!(config.validate(&t).is_err());
        let bad = RbmcConfig {
            batch_size: 1,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(&free_target(3)),
            Err(Error::Core(rbm_core::Error::BatchTooSmall(1)))
        ));
    }
}
