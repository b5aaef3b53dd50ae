//! Experiment configuration: parsing, defaults and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Force evaluation or sampling method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Direct,
    Rbm,
    RbmR,
    RbmSplit,
    Rbe,
    Rbmc,
    RbmSvgd,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Direct => "direct",
            MethodKind::Rbm => "rbm",
            MethodKind::RbmR => "rbm-r",
            MethodKind::RbmSplit => "rbm-split",
            MethodKind::Rbe => "rbe",
            MethodKind::Rbmc => "rbmc",
            MethodKind::RbmSvgd => "rbm-svgd",
        }
    }

    /// Methods whose `p` is a particle batch size.
    fn uses_particle_batches(self) -> bool {
        matches!(
            self,
            MethodKind::Rbm | MethodKind::RbmR | MethodKind::RbmSplit | MethodKind::Rbmc | MethodKind::RbmSvgd
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Mean and variance of the final coordinates.
    Moments,
    /// `W1` to the model's analytic equilibrium.
    W1,
    /// Position and velocity spread.
    Flocking,
    /// Second moment and diameter.
    Consensus,
    /// Time-averaged energies.
    Energy,
    /// Metropolis acceptance statistics.
    Acceptance,
}

impl Diagnostic {
    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::Moments => "moments",
            Diagnostic::W1 => "w1",
            Diagnostic::Flocking => "flocking",
            Diagnostic::Consensus => "consensus",
            Diagnostic::Energy => "energy",
            Diagnostic::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    Inverse,
    Adagrad,
}

/// First-order toy system `dX = -X dt + (1/(N-1)) Σ sin(X_j - X_i) dt + σ dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyParams {
    pub sigma: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self { sigma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DysonParams {
    /// Split point of `-ln r` for RBMC.
    pub split_radius: f64,
    /// Euler–Maruyama steps per RBMC proposal.
    pub inner_steps: usize,
    /// Clamp radius of the `1/x` kernel when integrating the SDE.
    pub clamp_radius: f64,
}

impl Default for DysonParams {
    fn default() -> Self {
        Self {
            split_radius: 0.01,
            inner_steps: 5,
            clamp_radius: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WealthParams {
    pub kappa: f64,
    pub diffusion: f64,
}

impl Default for WealthParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            diffusion: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuckerSmaleParams {
    pub kappa: f64,
    pub beta: f64,
    pub dim: usize,
}

impl Default for CuckerSmaleParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            beta: 0.4,
            dim: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusParams {
    pub kappa: f64,
    pub dim: usize,
    /// Standard deviation of the (centred) intrinsic velocities.
    pub dispersion: f64,
}

impl Default for ConsensusParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            dim: 1,
            dispersion: 0.0,
        }
    }
}

/// Periodic Lennard-Jones fluid (σ = ε = 1) started on a cubic lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LennardJonesParams {
    pub density: f64,
    /// Kernel split point for `rbm-split`.
    pub split_radius: f64,
}

impl Default for LennardJonesParams {
    fn default() -> Self {
        Self {
            density: 0.5,
            split_radius: 1.5,
        }
    }
}

/// Monovalent electrolyte with soft-core ions in a periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectrolyteParams {
    /// Number density `N/L³`.
    pub density: f64,
    /// Explicit charges; alternating ±1 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charges: Option<Vec<f64>>,
    /// Splitting parameter; `ρ^{2/3}` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Real-space cutoff; derived from `alpha` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// Frequencies drawn per refill of the RBE sample bank.
    pub bank_size: usize,
}

impl Default for ElectrolyteParams {
    fn default() -> Self {
        Self {
            density: 0.1,
            charges: None,
            alpha: None,
            cutoff: None,
            bank_size: 100_000,
        }
    }
}

/// Standard normal target for SVGD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianParams {
    pub dim: usize,
    pub bandwidth: f64,
    pub schedule: ScheduleKind,
    /// Initial particles are drawn from `N(init_mean, init_sd²)`.
    pub init_mean: f64,
    pub init_sd: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            dim: 1,
            bandwidth: 1.0,
            schedule: ScheduleKind::Constant,
            init_mean: 3.0,
            init_sd: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Toy(ToyParams),
    Dyson(DysonParams),
    Wealth(WealthParams),
    CuckerSmale(CuckerSmaleParams),
    Consensus(ConsensusParams),
    LennardJones(LennardJonesParams),
    Electrolyte(ElectrolyteParams),
    Gaussian(GaussianParams),
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Toy(_) => "toy",
            ModelConfig::Dyson(_) => "dyson",
            ModelConfig::Wealth(_) => "wealth",
            ModelConfig::CuckerSmale(_) => "cucker-smale",
            ModelConfig::Consensus(_) => "consensus",
            ModelConfig::LennardJones(_) => "lennard-jones",
            ModelConfig::Electrolyte(_) => "electrolyte",
            ModelConfig::Gaussian(_) => "gaussian",
        }
    }

    pub fn methods(&self) -> &'static [MethodKind] {
        use MethodKind::*;
        match self {
            ModelConfig::Toy(_) | ModelConfig::Wealth(_) => &[Direct, Rbm, RbmR],
            ModelConfig::Dyson(_) => &[Direct, Rbm, RbmR, Rbmc],
            ModelConfig::CuckerSmale(_) | ModelConfig::Consensus(_) => &[Direct, Rbm],
            ModelConfig::LennardJones(_) => &[Direct, Rbm, RbmSplit],
            ModelConfig::Electrolyte(_) => &[Direct, Rbe],
            ModelConfig::Gaussian(_) => &[Direct, RbmSvgd],
        }
    }

    pub fn diagnostics(&self, method: MethodKind) -> Vec<Diagnostic> {
        use Diagnostic::*;
        let mut d = vec![Moments];
        match self {
            ModelConfig::Toy(_) => {}
            ModelConfig::Dyson(_) => {
                d.push(W1);
                if method == MethodKind::Rbmc {
                    d.push(Acceptance);
                }
            }
            ModelConfig::Wealth(_) | ModelConfig::Gaussian(_) => d.push(W1),
            ModelConfig::CuckerSmale(_) => d.push(Flocking),
            ModelConfig::Consensus(_) => d.push(Consensus),
            ModelConfig::LennardJones(_) | ModelConfig::Electrolyte(_) => d.push(Energy),
        }
        d
    }

    /// `(N, Δt, steps, p)` used when the config leaves them out.
    fn defaults(&self, method: MethodKind) -> (usize, f64, u64, usize) {
        match self {
            ModelConfig::Toy(_) => (64, 0.01, 100, 2),
            ModelConfig::Dyson(_) if method == MethodKind::Rbmc => (500, 1e-4, 1000, 2),
            ModelConfig::Dyson(_) => (100, 1e-3, 1000, 2),
            ModelConfig::Wealth(_) => (10_000, 0.01, 300, 2),
            ModelConfig::CuckerSmale(_) => (256, 0.05, 1000, 2),
            ModelConfig::Consensus(_) => (100, 0.01, 1000, 2),
            ModelConfig::LennardJones(_) => (125, 1e-3, 1000, 2),
            ModelConfig::Electrolyte(_) => (100, 0.002, 1000, 10),
            ModelConfig::Gaussian(_) => (64, 0.1, 2000, 8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThermostatConfig {
    Andersen { nu: f64, temperature: f64 },
    Langevin { gamma: f64, temperature: f64 },
    NoseHoover { q: f64, temperature: f64 },
}

/// One experiment. Optional fields are filled by [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: MethodKind,
    /// Particle count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Batch size (frequencies per step for `rbe`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    /// Time step, RBMC inner step or SVGD step size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Time steps, RBMC sweeps or SVGD iterations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    /// Trajectory frame interval; initial and final frames only when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<Diagnostic>>,
    /// Sizes for the `bench` subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_sizes: Option<Vec<usize>>,
    pub model: ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermostat: Option<ThermostatConfig>,
}

fn one() -> usize {
    1
}

/// A validated configuration with every default applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub method: MethodKind,
    pub n: usize,
    pub p: usize,
    pub dt: f64,
    pub steps: u64,
    pub seed: u64,
    pub replicas: usize,
    pub record_every: u64,
    pub diagnostics: Vec<Diagnostic>,
    pub bench_sizes: Vec<usize>,
    pub model: ModelConfig,
    pub thermostat: Option<ThermostatConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Apply defaults and check every constraint that can be checked
    /// before running.
    pub fn resolve(&self) -> Result<Resolved> {
        let (n0, dt0, steps0, p0) = self.model.defaults(self.method);
        let n = self.n.unwrap_or(n0);
        let steps = self.steps.unwrap_or(steps0);
        let thermostat = self.thermostat.or(match self.model {
            ModelConfig::LennardJones(_) => Some(ThermostatConfig::Langevin {
                gamma: 1.0,
                temperature: 1.0,
            }),
            ModelConfig::Electrolyte(_) => Some(ThermostatConfig::Andersen {
                nu: 3.0,
                temperature: 1.0,
            }),
            _ => None,
        });
        let resolved = Resolved {
            method: self.method,
            n,
            p: self.p.unwrap_or(p0.min(n)),
            dt: self.dt.unwrap_or(dt0),
            steps,
            seed: self.seed,
            replicas: self.replicas,
            record_every: self.record_every.unwrap_or(steps.max(1)),
            diagnostics: self.diagnostics.clone().unwrap_or_else(|| self.model.diagnostics(self.method)),
            bench_sizes: self.bench_sizes.clone().unwrap_or_else(|| vec![500, 1000, 2000]),
            model: self.model.clone(),
            thermostat,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl Resolved {
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !m.methods().contains(&self.method) {
            let names: Vec<_> = m.methods().iter().map(|k| k.name()).collect();
            return Err(invalid(
                "method",
                format!(
                    "method {} is not available for model {} (use one of {})",
                    self.method.name(),
                    m.name(),
                    names.join(", ")
                ),
            ));
        }
        if self.n < 2 {
            return Err(invalid("n", format!("need at least 2 particles, got {}", self.n)));
        }
        if self.method.uses_particle_batches() {
            if self.p < 2 {
                return Err(invalid("p", rbm_core::Error::BatchTooSmall(self.p).to_string()));
            }
            if self.p > self.n {
                return Err(invalid("p", rbm_core::Error::BatchTooLarge { p: self.p, n: self.n }.to_string()));
            }
        }
        if self.method == MethodKind::Rbe && self.p < 1 {
            return Err(invalid("p", "RBE needs at least one frequency per step"));
        }
        positive("dt", self.dt)?;
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        let supported = m.diagnostics(self.method);
        if let Some(d) = self.diagnostics.iter().find(|d| !supported.contains(d)) {
            return Err(invalid(
                "diagnostics",
                format!("{} is not available for model {} with method {}", d.name(), m.name(), self.method.name()),
            ));
        }
        if self.bench_sizes.iter().any(|&s| s < 2) {
            return Err(invalid("bench_sizes", "sizes must be at least 2"));
        }
        self.validate_thermostat()?;
        self.validate_model()
    }

    fn validate_thermostat(&self) -> Result<()> {
        let Some(t) = self.thermostat else {
            return Ok(());
        };
        match (&self.model, t) {
            (ModelConfig::LennardJones(_), _) | (ModelConfig::Electrolyte(_), ThermostatConfig::Andersen { .. }) => {}
            (ModelConfig::Electrolyte(_), _) => {
                return Err(invalid("thermostat.kind", "the electrolyte supports the andersen thermostat only"))
            }
            _ => {
                return Err(invalid(
                    "thermostat",
                    format!("model {} has no thermostat", self.model.name()),
                ))
            }
        }
        match t {
            ThermostatConfig::Andersen { nu, temperature } => {
                positive("thermostat.nu", nu)?;
                positive("thermostat.temperature", temperature)
            }
            ThermostatConfig::Langevin { gamma, temperature } => {
                positive("thermostat.gamma", gamma)?;
                positive("thermostat.temperature", temperature)
            }
            ThermostatConfig::NoseHoover { q, temperature } => {
                positive("thermostat.q", q)?;
                positive("thermostat.temperature", temperature)
            }
        }
    }

    fn validate_model(&self) -> Result<()> {
        match &self.model {
            ModelConfig::Toy(t) => {
                if !(t.sigma >= 0.0 && t.sigma.is_finite()) {
                    return Err(invalid("model.sigma", "must be nonnegative"));
                }
            }
            ModelConfig::Dyson(d) => {
                positive("model.split_radius", d.split_radius)?;
                positive("model.clamp_radius", d.clamp_radius)?;
                if d.inner_steps == 0 {
                    return Err(invalid("model.inner_steps", "must be at least 1"));
                }
            }
            ModelConfig::Wealth(w) => {
                positive("model.kappa", w.kappa)?;
                positive("model.diffusion", w.diffusion)?;
            }
            ModelConfig::CuckerSmale(c) => {
                rbm_core::models::CuckerSmaleModel::new(c.kappa, c.beta).map_err(|e| invalid("model", e.to_string()))?;
                if c.dim == 0 || c.dim > 8 {
                    return Err(invalid("model.dim", "must be between 1 and 8"));
                }
            }
            ModelConfig::Consensus(c) => {
                positive("model.kappa", c.kappa)?;
                if c.dim == 0 || c.dim > 8 {
                    return Err(invalid("model.dim", "must be between 1 and 8"));
                }
                if !(c.dispersion >= 0.0) {
                    return Err(invalid("model.dispersion", "must be nonnegative"));
                }
            }
            ModelConfig::LennardJones(l) => {
                positive("model.density", l.density)?;
                positive("model.split_radius", l.split_radius)?;
                let box_length = (self.n as f64 / l.density).cbrt();
                if l.split_radius >= 0.5 * box_length {
                    return Err(invalid(
                        "model.split_radius",
                        rbm_core::Error::CutoffTooLarge {
                            cutoff: l.split_radius,
                            half: 0.5 * box_length,
                        }
                        .to_string(),
                    ));
                }
            }
            ModelConfig::Electrolyte(e) => {
                positive("model.density", e.density)?;
                if e.bank_size == 0 {
                    return Err(invalid("model.bank_size", "must be at least 1"));
                }
                let box_length = (self.n as f64 / e.density).cbrt();
                if let Some(q) = &e.charges {
                    if q.len() != self.n {
                        return Err(invalid(
                            "model.charges",
                            format!("{} charges for {} particles", q.len(), self.n),
                        ));
                    }
                    let net: f64 = q.iter().sum();
                    if net.abs() > rbm_ewald::system::NEUTRALITY_TOLERANCE {
                        return Err(invalid("model.charges", rbm_ewald::Error::NotNeutral(net).to_string()));
                    }
                } else if !self.n.is_multiple_of(2) {
                    return Err(invalid(
                        "n",
                        "alternating ±1 charges need an even particle count to be electroneutral",
                    ));
                }
                let params = crate::run::ewald_params(e, self.n, box_length, self.p);
                params.validate(box_length).map_err(|err| {
                    let field = if e.cutoff.is_some() { "model.cutoff" } else { "model.alpha" };
                    invalid(field, err.to_string())
                })?;
            }
            ModelConfig::Gaussian(g) => {
                positive("model.bandwidth", g.bandwidth)?;
                if g.dim == 0 || g.dim > 16 {
                    return Err(invalid("model.dim", "must be between 1 and 16"));
                }
                if !(g.init_sd >= 0.0 && g.init_mean.is_finite()) {
                    return Err(invalid("model.init_sd", "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// The resolved values as a config file that reproduces this run.
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            method: self.method,
            n: Some(self.n),
            p: Some(self.p),
            dt: Some(self.dt),
            steps: Some(self.steps),
            seed: self.seed,
            replicas: self.replicas,
            record_every: Some(self.record_every),
            diagnostics: Some(self.diagnostics.clone()),
            bench_sizes: Some(self.bench_sizes.clone()),
            model: self.model.clone(),
            thermostat: self.thermostat,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("configs serialize")
    }
}
