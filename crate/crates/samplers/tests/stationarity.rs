use std::sync::Arc;

use proptest::prelude::*;
use rbm_core::integrators::StepSchedule;
use rbm_samplers::{GaussianKernel, GibbsTarget, Proposal, RbmcChain, RbmcConfig, ShortRangePair};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const RANGE: f64 = 0.8;

fn bump(r: f64) -> f64 {
    2.0 * (1.0 - r / RANGE).powi(2)
}

fn two_particle_target() -> GibbsTarget {
    GibbsTarget::harmonic(1, 2, 1.0, 1.0, 1.0)
        .unwrap()
        .with_short_range(ShortRangePair {
            value: Arc::new(bump),
            cutoff: RANGE,
        })
        .unwrap()
}

/// Unnormalised density of the separation `s = x0 - x1`.
fn separation_density(s: f64) -> f64 {
    let phi = if s.abs() < RANGE { bump(s.abs()) } else { 0.0 };
    (-s * s / 4.0 - phi).exp()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn exact_proposals_sample_the_two_particle_gibbs_measure() {
    let config = RbmcConfig {
        inner_steps: 1,
        schedule: StepSchedule::Constant(1.0),
        proposal: Proposal::ExactHarmonic,
        ..Default::default()
    };
    let mut chain = RbmcChain::new(two_particle_target(), config, vec![-1.0, 1.0], 11, 0).unwrap();
    let sweeps = 1_000_000;
    let thin = 5;

    let edges: Vec<f64> = (0..=40).map(|k| -6.0 + 0.3 * k as f64).collect();
    let bins = edges.len() + 1;
    let mut counts = vec![0u64; bins];
    let mut samples = 0u64;
    for s in 0..sweeps {
        chain.sweep();
        if s % thin == 0 {
            let x = chain.positions();
            let sep = x[0] - x[1];
            counts[edges.partition_point(|&e| e <= sep)] += 1;
            samples += 1;
        }
    }

    let total = simpson(separation_density, -40.0, 40.0, 200_000);
    let mut probs = Vec::with_capacity(bins);
    probs.push(simpson(separation_density, -40.0, edges[0], 20_000) / total);
    for w in edges.windows(2) {
        probs.push(simpson(separation_density, w[0], w[1], 2_000) / total);
    }
    probs.push(simpson(separation_density, edges[edges.len() - 1], 40.0, 20_000) / total);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = p * samples as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 {chi2:.1} exceeds {critical:.1}");
    let rate = chain.stats().acceptance_rate();
    assert!(rate > 0.5 && rate < 1.0, "acceptance {rate}");
}

#[test]
fn dyson_acceptance_rate_is_in_the_sanity_band() {
    let n = 50;
    let config = RbmcConfig::default();
    let init: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect();
    let mut chain = RbmcChain::new(GibbsTarget::dyson(n, 0.01).unwrap(), config, init, 3, 0).unwrap();
    for _ in 0..2000 {
        chain.sweep();
    }
    let warm = chain.stats().clone();
    for _ in 0..2000 {
        chain.sweep();
    }
    let s = chain.stats();
    let rate = (s.accepted - warm.accepted) as f64 / (s.proposed - warm.proposed) as f64;
    assert!((0.3..1.0).contains(&rate), "acceptance {rate}");
    assert_eq!(s.non_finite, 0);
}

#[test]
fn chains_are_reproducible_and_replicas_differ() {
    let run = |replica| {
        let mut chain = RbmcChain::new(
            GibbsTarget::dyson(10, 0.01).unwrap(),
            RbmcConfig::default(),
            (0..10).map(|i| i as f64 * 0.2 - 1.0).collect(),
            5,
            replica,
        )
        .unwrap();
        for _ in 0..100 {
            chain.sweep();
        }
        chain.positions().to_vec()
    };
    assert_eq!(run(0), run(0));
    assert_ne!(run(0), run(1));
}

proptest! {
    #[test]
    fn acceptance_rate_is_a_probability(seed in 0u64..1000, dt in 1e-5f64..1e-2) {
        let config = RbmcConfig { schedule: StepSchedule::Constant(dt), energy_every: Some(1), ..Default::default() };
        let init: Vec<f64> = (0..8).map(|i| i as f64 * 0.05).collect();
        let mut chain = RbmcChain::new(GibbsTarget::dyson(8, 0.01).unwrap(), config, init, seed, 0).unwrap();
        for _ in 0..20 {
            chain.sweep();
        }
        let rate = chain.stats().acceptance_rate();
        prop_assert!((0.0..=1.0).contains(&rate));
        prop_assert_eq!(chain.stats().energy_trace.len(), 20);
    }

    #[test]
    fn gaussian_kernel_is_symmetric_and_positive(
        h in 0.05f64..5.0,
        x in prop::collection::vec(-3.0f64..3.0, 3),
        y in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let k = GaussianKernel::new(h).unwrap();
        prop_assert!((k.value(&x, &y) - k.value(&y, &x)).abs() < 1e-12);
        prop_assert!(k.value(&x, &x) > 0.0);
    }
}
