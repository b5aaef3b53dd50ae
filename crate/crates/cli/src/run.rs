//! Executes a resolved configuration, one replica at a time.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rbm_core::diagnostics::{wasserstein1_to_cdf, EmpiricalMeasure};
use rbm_core::integrators::{
    apply_andersen, interaction_forces, nose_hoover_step, step, FirstOrderSystem, Method, NoiseMode,
    SecondOrderSystem, System,
};
use rbm_core::kernel::KernelSpec;
use rbm_core::models::{
    consensus_functionals, flocking_functionals, semicircle_cdf, wealth_equilibrium_cdf, ConsensusModel,
    CuckerSmaleModel, DysonModel, WealthModel,
};
use rbm_core::rng::{streams, RngStream, StepRngs};
use rbm_core::ParticleState;
use rbm_ewald::{mh_sample_kvectors, ElectrolyteModel, EwaldMd, EwaldParams, FourierMethod, PeriodicChargeSystem};
use rbm_samplers::{GaussianKernel, GibbsTarget, RbmcChain, RbmcConfig, Svgd, SvgdSchedule, SvgdState};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{
    ConsensusParams, CuckerSmaleParams, Diagnostic, DysonParams, ElectrolyteParams, GaussianParams,
    LennardJonesParams, MethodKind, ModelConfig, Resolved, ScheduleKind, ThermostatConfig, WealthParams,
};
use crate::error::{CliError, Result};

/// Snapshots pooled for equilibrium diagnostics over the second half of a run.
const POOLED_SNAPSHOTS: u64 = 200;

/// One recorded configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    pub positions: Vec<f64>,
    pub velocities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult {
    pub replica: usize,
    pub dim: usize,
    pub frames: Vec<Frame>,
    pub metrics: BTreeMap<String, f64>,
}

/// Frames at the configured interval plus the pooled second-half samples.
struct Recorder {
    every: u64,
    steps: u64,
    pool_every: u64,
    frames: Vec<Frame>,
    pooled: Vec<f64>,
    snapshots: u64,
}

impl Recorder {
    fn new(cfg: &Resolved) -> Self {
        Self {
            every: cfg.record_every,
            steps: cfg.steps,
            pool_every: (cfg.steps / 2 / POOLED_SNAPSHOTS).max(1),
            frames: Vec::new(),
            pooled: Vec::new(),
            snapshots: 0,
        }
    }

    /// Whether step `k` is a pooled snapshot.
    fn pools(&self, k: u64) -> bool {
        let half = self.steps / 2;
        k == self.steps || (k > half && (k - half).is_multiple_of(self.pool_every))
    }

    fn observe(&mut self, k: u64, time: f64, positions: &[f64], velocities: Option<&[f64]>) {
        if k.is_multiple_of(self.every) || k == self.steps {
            self.frames.push(Frame {
                step: k,
                time,
                positions: positions.to_vec(),
                velocities: velocities.map(<[f64]>::to_vec),
            });
        }
        if self.pools(k) {
            self.pooled.extend_from_slice(positions);
            self.snapshots += 1;
        }
    }

    fn observe_state(&mut self, k: u64, s: &ParticleState) {
        self.observe(k, s.time, s.positions(), s.velocities());
    }
}

fn core_method(kind: MethodKind, p: usize) -> Method {
    match kind {
        MethodKind::Rbm => Method::Rbm { p },
        MethodKind::RbmR => Method::RbmR { p },
        MethodKind::RbmSplit => Method::RbmSplit { p },
        _ => Method::Direct,
    }
}

/// Ewald parameters for an electrolyte config.
pub fn ewald_params(e: &ElectrolyteParams, n: usize, box_length: f64, p: usize) -> EwaldParams {
    let mut params = match e.alpha {
        Some(alpha) => EwaldParams::with_alpha(alpha, box_length, p),
        None => EwaldParams::for_box(n, box_length, p),
    };
    if let Some(r_c) = e.cutoff {
        params.r_c = r_c;
    }
    params
}

/// Run every replica; results are in replica order whatever the thread count.
pub fn run_all(cfg: &Resolved) -> Result<Vec<ReplicaResult>> {
    (0..cfg.replicas).into_par_iter().map(|r| run_replica(cfg, r)).collect()
}

pub fn run_replica(cfg: &Resolved, replica: usize) -> Result<ReplicaResult> {
    let mut metrics = BTreeMap::new();
    let mut rec = Recorder::new(cfg);
    let dim = match &cfg.model {
        ModelConfig::Toy(t) => {
            let sys = FirstOrderSystem::new(KernelSpec::sine(), 1.0 / (cfg.n - 1) as f64)
                .with_linear_drift(1.0)
                .with_noise(t.sigma, NoiseMode::Additive);
            let init = normal_state(cfg, replica, 1);
            integrate_first_order(cfg, replica, &sys, init, &mut rec, |_| {})?;
            1
        }
        ModelConfig::Dyson(d) if cfg.method == MethodKind::Rbmc => {
            run_rbmc(cfg, replica, d, &mut rec, &mut metrics)?;
            1
        }
        ModelConfig::Dyson(d) => {
            let sys = DysonModel::new(cfg.n).system(Some(d.clamp_radius));
            let clamps_before = sys.kernel.clamp_count();
            integrate_first_order(cfg, replica, &sys, dyson_initial(cfg.n), &mut rec, |_| {})?;
            metrics.insert("clamps".into(), (sys.kernel.clamp_count() - clamps_before) as f64);
            1
        }
        ModelConfig::Wealth(w) => {
            run_wealth(cfg, replica, w, &mut rec, &mut metrics)?;
            1
        }
        ModelConfig::CuckerSmale(c) => {
            run_cucker_smale(cfg, replica, c, &mut rec, &mut metrics)?;
            c.dim
        }
        ModelConfig::Consensus(c) => {
            run_consensus(cfg, replica, c, &mut rec, &mut metrics)?;
            c.dim
        }
        ModelConfig::LennardJones(l) => {
            run_lennard_jones(cfg, replica, l, &mut rec, &mut metrics)?;
            3
        }
        ModelConfig::Electrolyte(e) => {
            run_electrolyte(cfg, replica, e, &mut rec, &mut metrics)?;
            3
        }
        ModelConfig::Gaussian(g) => {
            run_svgd(cfg, replica, g, &mut rec)?;
            g.dim
        }
    };

    let last = rec.frames.last().expect("final frame is always recorded").positions.clone();
    if cfg.diagnostics.contains(&Diagnostic::Moments) {
        let n = last.len() as f64;
        let mean = last.iter().sum::<f64>() / n;
        metrics.insert("mean".into(), mean);
        metrics.insert("variance".into(), last.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n);
    }
    if cfg.diagnostics.contains(&Diagnostic::W1) {
        insert_w1(cfg, &rec.pooled, &mut metrics)?;
    }
    Ok(ReplicaResult {
        replica,
        dim,
        frames: rec.frames,
        metrics,
    })
}

fn init_rng(cfg: &Resolved, replica: usize) -> rand_chacha::ChaCha8Rng {
    RngStream::for_replica(cfg.seed, replica as u64, streams::INIT).rng()
}

fn normal_state(cfg: &Resolved, replica: usize, dim: usize) -> ParticleState {
    let mut rng = init_rng(cfg, replica);
    let xs: Vec<f64> = (0..cfg.n * dim).map(|_| rng.sample(StandardNormal)).collect();
    ParticleState::new(dim, xs).expect("consistent shape")
}

/// Evenly spaced points on `[-1, 1]`.
fn dyson_initial(n: usize) -> ParticleState {
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect();
    ParticleState::from_scalars(&xs).expect("finite")
}

fn integrate_first_order<F: FnMut(&mut ParticleState)>(
    cfg: &Resolved,
    replica: usize,
    sys: &FirstOrderSystem,
    mut state: ParticleState,
    rec: &mut Recorder,
    mut after_step: F,
) -> Result<()> {
    let mut rngs = StepRngs::for_replica(cfg.seed, replica as u64);
    let method = core_method(cfg.method, cfg.p);
    rec.observe_state(0, &state);
    for k in 1..=cfg.steps {
        step(&mut state, System::First(sys), method, cfg.dt, &mut rngs)?;
        after_step(&mut state);
        rec.observe_state(k, &state);
    }
    Ok(())
}

fn run_rbmc(
    cfg: &Resolved,
    replica: usize,
    d: &DysonParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let target = GibbsTarget::dyson(cfg.n, d.split_radius)?;
    let config = RbmcConfig {
        inner_steps: d.inner_steps,
        batch_size: cfg.p,
        schedule: rbm_core::integrators::StepSchedule::Constant(cfg.dt),
        ..Default::default()
    };
    let init = dyson_initial(cfg.n).positions().to_vec();
    let mut chain = RbmcChain::new(target, config, init, cfg.seed, replica as u64)?;
    rec.observe(0, 0.0, chain.positions(), None);
    for k in 1..=cfg.steps {
        chain.sweep();
        rec.observe(k, k as f64, chain.positions(), None);
    }
    if cfg.diagnostics.contains(&Diagnostic::Acceptance) {
        let s = chain.stats();
        metrics.insert("acceptance_rate".into(), s.acceptance_rate());
        metrics.insert("accepted".into(), s.accepted as f64);
        metrics.insert("proposed".into(), s.proposed as f64);
        metrics.insert("non_finite".into(), s.non_finite as f64);
    }
    Ok(())
}

fn run_wealth(
    cfg: &Resolved,
    replica: usize,
    w: &WealthParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let model = WealthModel::new(cfg.n, w.kappa, w.diffusion);
    let init = model.initial_state(&mut init_rng(cfg, replica));
    let mut reflections = 0usize;
    integrate_first_order(cfg, replica, &model.system(), init, rec, |s| {
        reflections += WealthModel::reflect(s);
    })?;
    metrics.insert("reflections".into(), reflections as f64);
    Ok(())
}

fn run_cucker_smale(
    cfg: &Resolved,
    replica: usize,
    c: &CuckerSmaleParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let model = CuckerSmaleModel::new(c.kappa, c.beta)?;
    let mut state = model.initial_state(cfg.n, c.dim, &mut init_rng(cfg, replica));
    let mut rng = RngStream::for_replica(cfg.seed, replica as u64, streams::DIVISION).rng();
    let p = (cfg.method == MethodKind::Rbm).then_some(cfg.p);
    let (x0, v0) = flocking_functionals(&state);
    rec.observe_state(0, &state);
    for k in 1..=cfg.steps {
        model.step(&mut state, p, cfg.dt, &mut rng)?;
        rec.observe_state(k, &state);
    }
    if cfg.diagnostics.contains(&Diagnostic::Flocking) {
        let (x1, v1) = flocking_functionals(&state);
        metrics.insert("position_spread_initial".into(), x0);
        metrics.insert("position_spread_final".into(), x1);
        metrics.insert("velocity_spread_initial".into(), v0);
        metrics.insert("velocity_spread_final".into(), v1);
    }
    Ok(())
}

fn run_consensus(
    cfg: &Resolved,
    replica: usize,
    c: &ConsensusParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let mut rng = init_rng(cfg, replica);
    let mut nu: Vec<f64> = (0..cfg.n * c.dim)
        .map(|_| c.dispersion * rng.sample::<f64, _>(StandardNormal))
        .collect();
    for k in 0..c.dim {
        let mean = nu.iter().skip(k).step_by(c.dim).sum::<f64>() / cfg.n as f64;
        nu.iter_mut().skip(k).step_by(c.dim).for_each(|v| *v -= mean);
    }
    let model = ConsensusModel::new(cfg.n, c.dim, c.kappa, nu)?;
    let xs: Vec<f64> = (0..cfg.n * c.dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut state = ParticleState::new(c.dim, xs)?;
    let mut div = RngStream::for_replica(cfg.seed, replica as u64, streams::DIVISION).rng();
    let p = (cfg.method == MethodKind::Rbm).then_some(cfg.p);
    let (m0, d0) = consensus_functionals(&state);
    rec.observe_state(0, &state);
    for k in 1..=cfg.steps {
        model.step(&mut state, p, cfg.dt, &mut div)?;
        rec.observe_state(k, &state);
    }
    if cfg.diagnostics.contains(&Diagnostic::Consensus) {
        let (m1, d1) = consensus_functionals(&state);
        metrics.insert("m2_initial".into(), m0);
        metrics.insert("m2_final".into(), m1);
        metrics.insert("diameter_initial".into(), d0);
        metrics.insert("diameter_final".into(), d1);
        metrics.insert("reconstruction_error".into(), model.reconstruction_error());
    }
    Ok(())
}

/// Maxwellian velocities at temperature `t` with zero total momentum.
fn maxwell(n: usize, dim: usize, t: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n * dim).map(|_| t.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    for c in 0..dim {
        let mean = v.iter().skip(c).step_by(dim).sum::<f64>() / n as f64;
        v.iter_mut().skip(c).step_by(dim).for_each(|x| *x -= mean);
    }
    v
}

fn run_lennard_jones(
    cfg: &Resolved,
    replica: usize,
    l: &LennardJonesParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let n = cfg.n;
    let box_length = (n as f64 / l.density).cbrt();
    let side = (n as f64).cbrt().ceil() as usize;
    let h = box_length / side as f64;
    let mut xs = Vec::with_capacity(3 * n);
    'fill: for a in 0..side {
        for b in 0..side {
            for c in 0..side {
                if xs.len() == 3 * n {
                    break 'fill;
                }
                xs.extend([(a as f64 + 0.5) * h, (b as f64 + 0.5) * h, (c as f64 + 0.5) * h]);
            }
        }
    }
    let thermostat = cfg.thermostat.expect("resolved with a default thermostat");
    let temperature = match thermostat {
        ThermostatConfig::Andersen { temperature, .. }
        | ThermostatConfig::Langevin { temperature, .. }
        | ThermostatConfig::NoseHoover { temperature, .. } => temperature,
    };
    let v = maxwell(n, 3, temperature, &mut init_rng(cfg, replica));
    let mut state = ParticleState::new(3, xs)?.periodic(box_length)?.with_velocities(v)?;

    let lj = Arc::new(|r: f64| 24.0 * (2.0 * r.powi(-13) - r.powi(-7)));
    let kernel = KernelSpec::radial_split(lj, l.split_radius)?;
    let mut sys = SecondOrderSystem::new(kernel, 1.0);
    if let ThermostatConfig::Langevin { gamma, temperature } = thermostat {
        sys = sys.with_heat_bath(gamma, 1.0 / temperature);
    }
    let method = core_method(cfg.method, cfg.p);
    let mut rngs = StepRngs::for_replica(cfg.seed, replica as u64);
    let mut xi = 0.0;
    let mut temp_sum = 0.0;
    rec.observe_state(0, &state);
    for k in 1..=cfg.steps {
        match thermostat {
            ThermostatConfig::Langevin { .. } => {
                step(&mut state, System::Second(&sys), method, cfg.dt, &mut rngs)?;
            }
            ThermostatConfig::Andersen { nu, temperature } => {
                step(&mut state, System::Second(&sys), method, cfg.dt, &mut rngs)?;
                apply_andersen(&mut state, nu, temperature, cfg.dt, &mut rngs.thermostat)?;
            }
            ThermostatConfig::NoseHoover { q, temperature } => {
                let f = interaction_forces(&state, &sys.kernel, sys.alpha_n, method, &mut rngs.division)?;
                xi = nose_hoover_step(&mut state, xi, q, 1.0 / temperature, cfg.dt, &f)?;
            }
        }
        if rec.pools(k) {
            temp_sum += 2.0 * state.kinetic_energy().unwrap_or(0.0) / (3 * n) as f64;
        }
        rec.observe_state(k, &state);
    }
    if cfg.diagnostics.contains(&Diagnostic::Energy) {
        metrics.insert("temperature".into(), temp_sum / rec.snapshots as f64);
    }
    Ok(())
}

fn run_electrolyte(
    cfg: &Resolved,
    replica: usize,
    e: &ElectrolyteParams,
    rec: &mut Recorder,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let model = ElectrolyteModel::from_density(cfg.n, e.density)?;
    let box_length = model.box_length;
    let mut system = model.initial_system(&mut init_rng(cfg, replica))?;
    if let Some(q) = &e.charges {
        system = PeriodicChargeSystem::new(system.state, q.clone())?;
    }
    let params = ewald_params(e, cfg.n, box_length, cfg.p);
    let method = match cfg.method {
        MethodKind::Rbe => FourierMethod::Rbe(mh_sample_kvectors(
            params.alpha,
            box_length,
            e.bank_size,
            RngStream::for_replica(cfg.seed, replica as u64, streams::FREQUENCIES).rng(),
        )),
        _ => FourierMethod::Exact,
    };
    let thermostat = match cfg.thermostat {
        Some(ThermostatConfig::Andersen { nu, temperature }) => {
            Some(rbm_core::integrators::Thermostat::Andersen { nu, temperature })
        }
        _ => None,
    };
    let mut md = EwaldMd::new(
        system,
        params,
        Some(model.lj),
        method,
        thermostat,
        RngStream::for_replica(cfg.seed, replica as u64, streams::THERMOSTAT).rng(),
    )?;
    let mut sums = [0.0; 6];
    let mut estimate_sum = 0.0;
    let mut worst_net_force = 0.0f64;
    rec.observe_state(0, &md.system.state);
    for k in 1..=cfg.steps {
        let report = md.step(cfg.dt)?;
        worst_net_force = worst_net_force.max(report.net_force);
        if rec.pools(k) && cfg.diagnostics.contains(&Diagnostic::Energy) {
            let en = md.energies()?;
            for (s, v) in sums.iter_mut().zip([en.real, en.fourier, en.self_energy, en.lj, en.kinetic, en.temperature]) {
                *s += v;
            }
            estimate_sum += md.fourier_estimate();
        }
        rec.observe_state(k, &md.system.state);
    }
    metrics.insert("max_net_force".into(), worst_net_force);
    if cfg.diagnostics.contains(&Diagnostic::Energy) {
        let m = rec.snapshots as f64;
        for (name, s) in ["u_real", "u_fourier", "u_self", "u_lj", "kinetic", "temperature"].iter().zip(sums) {
            metrics.insert((*name).into(), s / m);
        }
        metrics.insert("u_fourier_step".into(), estimate_sum / m);
    }
    Ok(())
}

fn run_svgd(cfg: &Resolved, replica: usize, g: &GaussianParams, rec: &mut Recorder) -> Result<()> {
    let mut rng = init_rng(cfg, replica);
    let xs: Vec<f64> = (0..cfg.n * g.dim)
        .map(|_| g.init_mean + g.init_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let state = SvgdState::standard_normal(g.dim, xs, GaussianKernel::new(g.bandwidth)?)?;
    let schedule = match g.schedule {
        ScheduleKind::Constant => SvgdSchedule::Constant(cfg.dt),
        ScheduleKind::Inverse => SvgdSchedule::Inverse(cfg.dt),
        ScheduleKind::Adagrad => SvgdSchedule::AdaGrad {
            eta: cfg.dt,
            epsilon: 1e-8,
        },
    };
    let mut run = Svgd::new(state, schedule)?;
    let mut div = RngStream::for_replica(cfg.seed, replica as u64, streams::DIVISION).rng();
    let p = (cfg.method == MethodKind::RbmSvgd).then_some(cfg.p);
    rec.observe(0, 0.0, &run.state.particles, None);
    for k in 1..=cfg.steps {
        run.step(p, &mut div)?;
        rec.observe(k, k as f64, &run.state.particles, None);
    }
    Ok(())
}

fn insert_w1(cfg: &Resolved, pooled: &[f64], metrics: &mut BTreeMap<String, f64>) -> Result<()> {
    let sample = EmpiricalMeasure::from_scalars(pooled)?;
    let (lo, hi) = pooled
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let w1 = match &cfg.model {
        ModelConfig::Dyson(_) => {
            let near = pooled.iter().filter(|x| x.abs() < 0.05).count() as f64;
            metrics.insert("density_at_zero".into(), near / pooled.len() as f64 / 0.1);
            metrics.insert("semicircle_density_at_zero".into(), 2f64.sqrt() / PI);
            wasserstein1_to_cdf(&sample, semicircle_cdf, lo.min(-2f64.sqrt()), hi.max(2f64.sqrt()))?
        }
        ModelConfig::Wealth(w) => {
            let (kappa, d) = (w.kappa, w.diffusion);
            wasserstein1_to_cdf(&sample, move |y| wealth_equilibrium_cdf(y, kappa, d), 0.0, hi)?
        }
        ModelConfig::Gaussian(g) => {
            if g.dim != 1 {
                return Err(CliError::Run("w1 is computed for one-dimensional targets only".into()));
            }
            let normal = Normal::new(0.0, 1.0).expect("valid");
            wasserstein1_to_cdf(&sample, move |x| normal.cdf(x), lo.min(-8.0), hi.max(8.0))?
        }
        _ => unreachable!("validated diagnostics"),
    };
    metrics.insert("w1".into(), w1);
    Ok(())
}
