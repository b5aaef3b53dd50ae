use std::f64::consts::{PI, SQRT_2};

use crate::integrators::{FirstOrderSystem, NoiseMode};
use crate::kernel::KernelSpec;

/// Dyson Brownian motion
/// `dλ_j = -λ_j dt + (1/(N-1)) Σ_{k≠j} 1/(λ_j - λ_k) dt + (1/√(N-1)) dW_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonModel {
    pub n: usize,
}

impl DysonModel {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// The SDE as a first-order system. The `1/x` kernel is singular; pass a
    /// clamp radius to guard it when stepping directly.
    pub fn system(&self, clamp_radius: Option<f64>) -> FirstOrderSystem {
        let m = (self.n - 1) as f64;
        let mut kernel = KernelSpec::inverse_distance();
        if let Some(eps) = clamp_radius {
            kernel = kernel.with_clamp(eps);
        }
        FirstOrderSystem::new(kernel, 1.0 / m)
            .with_linear_drift(1.0)
            .with_noise(1.0 / m.sqrt(), NoiseMode::Additive)
    }
}

/// Semicircle law `(1/π)√(2 - x²)` on `[-√2, √2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= SQRT_2 {
        0.0
    } else {
        (2.0 - x * x).sqrt() / PI
    }
}

/// Distribution function of the semicircle law.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -SQRT_2 {
        0.0
    } else if x >= SQRT_2 {
        1.0
    } else {
        0.5 + (x * (2.0 - x * x).sqrt() + 2.0 * (x / SQRT_2).asin()) / (2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::full_force;
    use crate::state::ParticleState;

    #[test]
    fn semicircle_values() {
        assert!((semicircle_density(0.0) - 0.45016).abs() < 1e-5);
        assert_eq!(semicircle_density(SQRT_2), 0.0);
        assert_eq!(semicircle_density(-SQRT_2), 0.0);
        assert_eq!(semicircle_density(3.0), 0.0);
    }

    #[test]
    fn semicircle_integrates_to_one() {
        // Substituting x = √2 sin θ removes the endpoint square roots.
        let n = 2000;
        let (a, b) = (-PI / 2.0, PI / 2.0);
        let h = (b - a) / n as f64;
        let f = |t: f64| semicircle_density(SQRT_2 * t.sin()) * SQRT_2 * t.cos();
        let mut total = f(a) + f(b);
        for k in 1..n {
            total += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total *= h / 3.0;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn cdf_matches_density() {
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        for k in 1..40 {
            let x = -1.4 + 0.07 * k as f64;
            let h = 1e-6;
            let d = (semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2.0 * h);
            assert!((d - semicircle_density(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn drift_permutes_with_labels() {
        let m = DysonModel::new(5);
        let sys = m.system(None);
        let xs = [0.3, -1.1, 0.8, 0.05, -0.4];
        let perm = [3, 0, 4, 1, 2];
        let a = ParticleState::from_scalars(&xs).unwrap();
        let b = ParticleState::from_scalars(&perm.map(|k| xs[k])).unwrap();
        for (i, &k) in perm.iter().enumerate() {
            let fa = full_force(k, &a, &sys.kernel, sys.alpha_n)[0];
            let fb = full_force(i, &b, &sys.kernel, sys.alpha_n)[0];
            assert!((fa - fb).abs() < 1e-14);
        }
    }
}
