//! Per-step cost of the direct and random batch methods across sizes.

use rand::Rng;
use rand_distr::StandardNormal;
use rbm_core::diagnostics::{scaling_benchmark, ScalingPoint};
use rbm_core::integrators::{step, FirstOrderSystem, Method, NoiseMode, System};
use rbm_core::kernel::KernelSpec;
use rbm_core::models::{ConsensusModel, CuckerSmaleModel, DysonModel, WealthModel};
use rbm_core::rng::{streams, RngStream, StepRngs};
use rbm_core::ParticleState;
use serde::Serialize;

use crate::config::{ModelConfig, Resolved};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub n: usize,
    pub seconds_per_step: f64,
    /// `t(n)/t(previous n)`.
    pub ratio: Option<f64>,
}

const REPEATS: usize = 7;

fn first_order_stepper(
    sys: FirstOrderSystem,
    mut state: ParticleState,
    method: Method,
    dt: f64,
    seed: u64,
) -> impl FnMut() {
    let mut rngs = StepRngs::new(seed);
    move || {
        step(&mut state, System::First(&sys), method, dt, &mut rngs).expect("benchmark step");
    }
}

fn normal(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, streams::INIT).rng();
    (0..n * dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Stepper for `cfg.model` at size `n`, direct when `p` is `None`.
fn stepper(cfg: &Resolved, n: usize, p: Option<usize>) -> Box<dyn FnMut()> {
    let method = p.map_or(Method::Direct, |p| Method::Rbm { p });
    let seed = cfg.seed;
    let dt = cfg.dt;
    match &cfg.model {
        ModelConfig::Toy(t) => {
            let sys = FirstOrderSystem::new(KernelSpec::sine(), 1.0 / (n - 1) as f64)
                .with_linear_drift(1.0)
                .with_noise(t.sigma, NoiseMode::Additive);
            let state = ParticleState::new(1, normal(n, 1, seed)).expect("shape");
            Box::new(first_order_stepper(sys, state, method, dt, seed))
        }
        ModelConfig::Dyson(d) => {
            let sys = DysonModel::new(n).system(Some(d.clamp_radius));
            let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect();
            let state = ParticleState::from_scalars(&xs).expect("finite");
            Box::new(first_order_stepper(sys, state, method, dt, seed))
        }
        ModelConfig::Wealth(w) => {
            let model = WealthModel::new(n, w.kappa, w.diffusion);
            let state = model.initial_state(&mut RngStream::new(seed, streams::INIT).rng());
            let sys = model.system();
            let inner = first_order_stepper(sys, state, method, dt, seed);
            Box::new(inner)
        }
        ModelConfig::CuckerSmale(c) => {
            let model = CuckerSmaleModel::new(c.kappa, c.beta).expect("validated");
            let mut state = model.initial_state(n, c.dim, &mut RngStream::new(seed, streams::INIT).rng());
            let mut rng = RngStream::new(seed, streams::DIVISION).rng();
            Box::new(move || model.step(&mut state, p, dt, &mut rng).expect("benchmark step"))
        }
        ModelConfig::Consensus(c) => {
            let model = ConsensusModel::new(n, c.dim, c.kappa, vec![0.0; n * c.dim]).expect("valid");
            let mut state = ParticleState::new(c.dim, normal(n, c.dim, seed)).expect("shape");
            let mut rng = RngStream::new(seed, streams::DIVISION).rng();
            Box::new(move || model.step(&mut state, p, dt, &mut rng).expect("benchmark step"))
        }
        _ => unreachable!("checked by run_bench"),
    }
}

/// Time `cfg.steps` steps at each of `cfg.bench_sizes` for the direct method
/// and RBM with batch size `cfg.p`.
pub fn run_bench(cfg: &Resolved) -> Result<Vec<BenchRow>> {
    if !matches!(
        cfg.model,
        ModelConfig::Toy(_)
            | ModelConfig::Dyson(_)
            | ModelConfig::Wealth(_)
            | ModelConfig::CuckerSmale(_)
            | ModelConfig::Consensus(_)
    ) {
        return Err(CliError::Invalid {
            field: "model.kind".into(),
            message: format!("bench is not available for model {}", cfg.model.name()),
        });
    }
    if let Some(&n) = cfg.bench_sizes.iter().find(|&&n| n < cfg.p) {
        return Err(CliError::Invalid {
            field: "bench_sizes".into(),
            message: rbm_core::Error::BatchTooLarge { p: cfg.p, n }.to_string(),
        });
    }
    let steps = cfg.steps as usize;
    let mut rows = Vec::new();
    for (name, p) in [("direct", None), ("rbm", Some(cfg.p))] {
        let points: Vec<ScalingPoint> = scaling_benchmark(&cfg.bench_sizes, steps, REPEATS, |n| stepper(cfg, n, p));
        let mut prev: Option<f64> = None;
        for pt in points {
            rows.push(BenchRow {
                method: name,
                n: pt.n,
                seconds_per_step: pt.seconds_per_step,
                ratio: prev.map(|t| pt.seconds_per_step / t),
            });
            prev = Some(pt.seconds_per_step);
        }
    }
    Ok(rows)
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = format!("{:<8} {:>8} {:>16} {:>8}\n", "method", "N", "seconds/step", "ratio");
    for r in rows {
        let ratio = r.ratio.map_or("-".to_string(), |x| format!("{x:.2}"));
        s += &format!("{:<8} {:>8} {:>16.6e} {:>8}\n", r.method, r.n, r.seconds_per_step, ratio);
    }
    s
}
