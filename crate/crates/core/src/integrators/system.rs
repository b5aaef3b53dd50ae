use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, VectorField};

/// How the Brownian increment enters a first-order step.
#[derive(Clone, Default)]
pub enum NoiseMode {
    /// `σ dW`.
    #[default]
    Additive,
    /// `σ g(x) dW` with `g` applied component-wise, evaluated at the start
    /// of the step (Itô).
    Multiplicative(VectorField),
}

/// `dX_i = [b(X_i) + α_N Σ_{j≠i} K(X_i - X_j)] dt + σ dW_i`.
#[derive(Clone)]
pub struct FirstOrderSystem {
    pub drift: Option<VectorField>,
    pub kernel: KernelSpec,
    pub alpha_n: f64,
    pub sigma: f64,
    pub noise: NoiseMode,
}

impl FirstOrderSystem {
    pub fn new(kernel: KernelSpec, alpha_n: f64) -> Self {
        Self {
            drift: None,
            kernel,
            alpha_n,
            sigma: 0.0,
            noise: NoiseMode::Additive,
        }
    }

    pub fn with_drift<F>(mut self, b: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.drift = Some(std::sync::Arc::new(b));
        self
    }

    /// Linear confining drift `b(x) = -λ x`.
    pub fn with_linear_drift(self, lambda: f64) -> Self {
        self.with_drift(move |x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = -lambda * xi;
            }
        })
    }

    pub fn with_noise(mut self, sigma: f64, noise: NoiseMode) -> Self {
        self.sigma = sigma;
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be ≥ 0, got {}", self.sigma)));
        }
        if !self.alpha_n.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        Ok(())
    }
}

/// `dr_i = v_i dt`, `m_i dv_i = [b(r_i) + α_N Σ_{j≠i} K(r_i - r_j) - γ v_i] dt + σ dW_i`.
#[derive(Clone)]
pub struct SecondOrderSystem {
    pub drift: Option<VectorField>,
    pub kernel: KernelSpec,
    pub alpha_n: f64,
    pub gamma: f64,
    pub sigma: f64,
    /// Per-particle masses; `None` means unit masses.
    pub masses: Option<Vec<f64>>,
}

impl SecondOrderSystem {
    pub fn new(kernel: KernelSpec, alpha_n: f64) -> Self {
        Self {
            drift: None,
            kernel,
            alpha_n,
            gamma: 0.0,
            sigma: 0.0,
            masses: None,
        }
    }

    pub fn with_drift<F>(mut self, b: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.drift = Some(std::sync::Arc::new(b));
        self
    }

    pub fn with_linear_drift(self, lambda: f64) -> Self {
        self.with_drift(move |x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = -lambda * xi;
            }
        })
    }

    pub fn with_friction(mut self, gamma: f64, sigma: f64) -> Self {
        self.gamma = gamma;
        self.sigma = sigma;
        self
    }

    /// Langevin heat bath at inverse temperature `β`: `σ = √(2γ/β)`.
    pub fn with_heat_bath(self, gamma: f64, beta: f64) -> Self {
        self.with_friction(gamma, (2.0 * gamma / beta).sqrt())
    }

    pub fn with_masses(mut self, masses: Vec<f64>) -> Self {
        self.masses = Some(masses);
        self
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses.as_ref().map_or(1.0, |m| m[i])
    }

    /// Whether `σ = √(2γ/β)` holds to 1e-12.
    pub fn satisfies_fluctuation_dissipation(&self, beta: f64) -> bool {
        (self.sigma - (2.0 * self.gamma / beta).sqrt()).abs() <= 1e-12
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.gamma >= 0.0 && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "friction and noise must be ≥ 0, got γ={} σ={}",
                self.gamma, self.sigma
            )));
        }
        if let Some(m) = &self.masses {
            if m.len() != n {
                return Err(Error::Shape(format!("{} masses for {n} particles", m.len())));
            }
            if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidParameter("masses must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Either kind of system, for steppers that handle both.
#[derive(Clone, Copy)]
pub enum System<'a> {
    First(&'a FirstOrderSystem),
    Second(&'a SecondOrderSystem),
}

impl System<'_> {
    pub fn kernel(&self) -> &KernelSpec {
        match self {
            System::First(s) => &s.kernel,
            System::Second(s) => &s.kernel,
        }
    }

    pub fn alpha_n(&self) -> f64 {
        match self {
            System::First(s) => s.alpha_n,
            System::Second(s) => s.alpha_n,
        }
    }
}

impl<'a> From<&'a FirstOrderSystem> for System<'a> {
    fn from(s: &'a FirstOrderSystem) -> Self {
        System::First(s)
    }
}

impl<'a> From<&'a SecondOrderSystem> for System<'a> {
    fn from(s: &'a SecondOrderSystem) -> Self {
        System::Second(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_bath_satisfies_fluctuation_dissipation() {
        let s = SecondOrderSystem::new(KernelSpec::zero(), 1.0).with_heat_bath(2.5, 0.7);
        assert!(s.satisfies_fluctuation_dissipation(0.7));
        assert!(!s.satisfies_fluctuation_dissipation(0.8));
    }

    #[test]
    fn rejects_negative_parameters() {
        let s = FirstOrderSystem::new(KernelSpec::zero(), 1.0).with_noise(-1.0, NoiseMode::Additive);
        assert!(s.validate().is_err());
        let s = SecondOrderSystem::new(KernelSpec::zero(), 1.0).with_masses(vec![1.0, 0.0]);
        assert!(s.validate(2).is_err());
        assert!(s.validate(3).is_err());
    }
}
