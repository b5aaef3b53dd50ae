use rand::Rng;
use rbm_core::rng::{streams, RngStream};
use rbm_core::ParticleState;
use rbm_ewald::{
    fourier_forces_exact, mh_sample_kvectors, rbe_forces, real_space_forces, sum_s, EwaldParams,
    PeriodicChargeSystem,
};

fn random_system(n: usize, l: f64, seed: u64) -> PeriodicChargeSystem {
    let mut rng = RngStream::new(seed, streams::INIT).rng();
    let xs = (0..3 * n).map(|_| rng.random::<f64>() * l).collect();
    let q = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    PeriodicChargeSystem::new(ParticleState::new(3, xs).unwrap().periodic(l).unwrap(), q).unwrap()
}

#[test]
fn batch_average_approaches_exact_fourier_force() {
    let l = 4.0;
    let sys = random_system(16, l, 3);
    let params = EwaldParams::with_alpha(1.0, l, 10);
    let exact = fourier_forces_exact(&sys, &params);
    let s = sum_s(params.alpha, l);
    let mut bank = mh_sample_kvectors(params.alpha, l, 200_000, RngStream::new(4, streams::FREQUENCIES).rng());
    // standard errors from block means absorb the chain's autocorrelation
    let (blocks, per_block) = (100, 1000);
    let mut block_means = vec![vec![0.0; exact.len()]; blocks];
    for means in block_means.iter_mut() {
        for _ in 0..per_block {
            let f = rbe_forces(&sys, bank.next_batch(10), s).forces;
            for (m, x) in means.iter_mut().zip(&f) {
                *m += x / per_block as f64;
            }
        }
    }
    let mut within = 0;
    for k in 0..exact.len() {
        let mean = block_means.iter().map(|b| b[k]).sum::<f64>() / blocks as f64;
        let var = block_means.iter().map(|b| (b[k] - mean).powi(2)).sum::<f64>() / (blocks - 1) as f64;
        let z = (mean - exact[k]).abs() / (var / blocks as f64).sqrt();
        if z < 3.0 {
            within += 1;
        }
    }
    // 3σ bands hold for 99.7% of components; allow one outlier in 48
    assert!(within >= exact.len() - 1, "{within} of {} within 3 standard errors", exact.len());
}

#[test]
fn net_force_vanishes_on_random_configurations() {
    for seed in 0..100 {
        let n = 2 * (5 + seed as usize % 20);
        let l = 5.0;
        let sys = random_system(n, l, seed);
        let params = EwaldParams::with_alpha(1.0, l, 10);
        let mut bank = mh_sample_kvectors(1.0, l, 10, RngStream::new(seed, streams::FREQUENCIES).rng());
        let rbe = rbe_forces(&sys, bank.next_batch(10), sum_s(1.0, l)).forces;
        let exact = fourier_forces_exact(&sys, &params);
        let real = real_space_forces(&sys, &params).unwrap();
        for f in [&rbe, &exact, &real] {
            for c in 0..3 {
                let total: f64 = f.iter().skip(c).step_by(3).sum();
                assert!(total.abs() < 1e-10, "seed {seed}: {total}");
            }
        }
    }
}
