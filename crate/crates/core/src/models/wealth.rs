use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::integrators::{FirstOrderSystem, NoiseMode};
use crate::kernel::KernelSpec;
use crate::state::ParticleState;

/// Mean wealth `η = √2/√π`, the mean of `|Z|` for standard normal `Z`.
pub const WEALTH_ETA: f64 = 0.797_884_560_802_865_4;

/// Homogeneous wealth exchange
/// `dY_i = -(κ/(N-1)) Σ_k (Y_i - Y_k) dt + √(2D) Y_i dW_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WealthModel {
    pub n: usize,
    pub kappa: f64,
    pub diffusion: f64,
}

impl WealthModel {
    pub fn new(n: usize, kappa: f64, diffusion: f64) -> Self {
        Self { n, kappa, diffusion }
    }

    /// Trading potential `y²/2` gives the kernel `K(x) = -x`.
    pub fn system(&self) -> FirstOrderSystem {
        let g = Arc::new(|y: &[f64], out: &mut [f64]| out.copy_from_slice(y));
        FirstOrderSystem::new(KernelSpec::linear(-1.0), self.kappa / (self.n - 1) as f64)
            .with_noise((2.0 * self.diffusion).sqrt(), NoiseMode::Multiplicative(g))
    }

    /// Initial wealth `|Z|`, `Z ~ N(0, 1)`, whose mean is `η`.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> ParticleState {
        let ys: Vec<f64> = (0..self.n)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        ParticleState::from_scalars(&ys).expect("finite samples")
    }

    /// Reflect negative wealth back to `|Y|`; returns how many were reflected.
    pub fn reflect(state: &mut ParticleState) -> usize {
        let mut count = 0;
        for y in state.positions_mut() {
            if *y < 0.0 {
                *y = -*y;
                count += 1;
            }
        }
        count
    }

    pub fn equilibrium_density(&self, y: f64) -> f64 {
        wealth_equilibrium_density(y, self.kappa, self.diffusion)
    }
}

fn inverse_gamma_parameters(kappa: f64, diffusion: f64) -> (f64, f64) {
    (kappa / diffusion + 1.0, kappa * WEALTH_ETA / diffusion)
}

/// Inverse-Gamma equilibrium density with shape `κ/D + 1` and scale `κη/D`.
pub fn wealth_equilibrium_density(y: f64, kappa: f64, diffusion: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (a, b) = inverse_gamma_parameters(kappa, diffusion);
    (a * b.ln() - ln_gamma(a) - (a + 1.0) * y.ln() - b / y).exp()
}

/// Distribution function of the equilibrium: `Q(a, b/y)`.
pub fn wealth_equilibrium_cdf(y: f64, kappa: f64, diffusion: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (a, b) = inverse_gamma_parameters(kappa, diffusion);
    gamma_ur(a, b / y)
}

/// Mode `κη/(D(κ/D + 2)) = κη/(κ + 2D)` of the equilibrium density.
pub fn wealth_equilibrium_mode(kappa: f64, diffusion: f64) -> f64 {
    kappa * WEALTH_ETA / (kappa + 2.0 * diffusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eta_constant() {
        assert!((WEALTH_ETA - (2.0 / PI).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn density_vanishes_off_support() {
        assert_eq!(wealth_equilibrium_density(0.0, 1.0, 0.5), 0.0);
        assert_eq!(wealth_equilibrium_density(-2.0, 1.0, 0.5), 0.0);
    }

    fn integrate(kappa: f64, d: f64) -> f64 {
        // y = e^s maps (0, ∞) to ℝ; the integrand decays doubly exponentially
        // on the left and like e^{-(κ/D + 1)s} on the right.
        let (lo, hi, n) = (-8.0f64, 40.0f64, 200_000);
        let h = (hi - lo) / n as f64;
        let f = |s: f64| wealth_equilibrium_density(s.exp(), kappa, d) * s.exp();
        let mut total = f(lo) + f(hi);
        for k in 1..n {
            total += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total * h / 3.0
    }

    #[test]
    fn density_is_normalized() {
        for (kappa, d) in [(1.0, 0.5), (1.0, 1.0), (2.0, 0.3)] {
            let total = integrate(kappa, d);
            assert!((total - 1.0).abs() < 1e-6, "κ={kappa} D={d}: {total}");
        }
    }

    #[test]
    fn mode_matches_numeric_maximum() {
        for (kappa, d) in [(1.0, 0.5), (1.0, 1.0), (3.0, 0.7)] {
            // golden-section search on the log density
            let f = |y: f64| -wealth_equilibrium_density(y, kappa, d).ln();
            let (mut a, mut b) = (1e-3, 5.0);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let c = b - g * (b - a);
                let e = a + g * (b - a);
                if f(c) < f(e) {
                    b = e;
                } else {
                    a = c;
                }
            }
            let numeric = 0.5 * (a + b);
            assert!((numeric - wealth_equilibrium_mode(kappa, d)).abs() < 1e-7);
        }
    }

    #[test]
    fn cdf_matches_density() {
        for k in 1..60 {
            let y = 0.05 * k as f64;
            let h = 1e-6;
            let d = (wealth_equilibrium_cdf(y + h, 1.0, 0.5) - wealth_equilibrium_cdf(y - h, 1.0, 0.5)) / (2.0 * h);
            assert!((d - wealth_equilibrium_density(y, 1.0, 0.5)).abs() < 1e-6);
        }
        assert!((wealth_equilibrium_cdf(1e6, 1.0, 0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_mean_is_eta() {
        let m = WealthModel::new(200_000, 1.0, 0.5);
        let s = m.initial_state(&mut crate::rng::RngStream::new(1, 4).rng());
        let mean = s.positions().iter().sum::<f64>() / m.n as f64;
        assert!((mean - WEALTH_ETA).abs() < 0.005);
    }

    #[test]
    fn reflection_counts() {
        let mut s = ParticleState::from_scalars(&[0.5, -0.25, -1.0]).unwrap();
        assert_eq!(WealthModel::reflect(&mut s), 2);
        assert_eq!(s.positions(), &[0.5, 0.25, 1.0]);
    }
}
