use std::sync::Arc;

use rand::Rng;

use crate::batch::{random_division, BatchDivision};
use crate::error::{Error, Result};
use crate::kernel::VectorField;
use crate::state::ParticleState;

/// Consensus dynamics `q̇_i = ν_i + (κ/(N-1)) Σ_{j≠i} a_ij Γ(q_j - q_i)`,
/// rewritten with an antisymmetric decomposition `ν_i = (κ/(N-1)) Σ_j ν̄_ij`
/// so that the random batch version samples dispersion and interaction
/// together.
#[derive(Clone)]
pub struct ConsensusModel {
    pub kappa: f64,
    /// Symmetric nonnegative N×N matrix; `None` means `a_ij ≡ 1`.
    pub adjacency: Option<Vec<f64>>,
    /// Intrinsic velocities (N×d), summing to zero.
    pub nu: Vec<f64>,
    pub interaction: VectorField,
    n: usize,
    dim: usize,
}

impl ConsensusModel {
    /// All-to-all model with `Γ(q) = q`.
    pub fn new(n: usize, dim: usize, kappa: f64, nu: Vec<f64>) -> Result<Self> {
        if nu.len() != n * dim {
            return Err(Error::Shape(format!("{} intrinsic velocities for {n}×{dim}", nu.len())));
        }
        for c in 0..dim {
            let total: f64 = nu.iter().skip(c).step_by(dim).sum();
            let scale: f64 = nu.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if total.abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!(
                    "intrinsic velocities must sum to zero, component {c} sums to {total}"
                )));
            }
        }
        Ok(Self {
            kappa,
            adjacency: None,
            nu,
            interaction: Arc::new(|q, out| out.copy_from_slice(q)),
            n,
            dim,
        })
    }

    pub fn with_adjacency(mut self, a: Vec<f64>) -> Result<Self> {
        let n = self.n;
        if a.len() != n * n {
            return Err(Error::Shape(format!("adjacency has {} entries for N={n}", a.len())));
        }
        for i in 0..n {
            for j in 0..n {
                if a[i * n + j] < 0.0 || a[i * n + j] != a[j * n + i] {
                    return Err(Error::InvalidParameter("adjacency must be symmetric and nonnegative".into()));
                }
            }
        }
        self.adjacency = Some(a);
        Ok(self)
    }

    pub fn with_interaction(mut self, gamma: VectorField) -> Self {
        self.interaction = gamma;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn a(&self, i: usize, j: usize) -> f64 {
        self.adjacency.as_ref().map_or(1.0, |a| a[i * self.n + j])
    }

    /// Default dispersion decomposition `ν̄_ij = (N-1)(ν_i - ν_j)/(κN)`.
    pub fn nu_bar(&self, i: usize, j: usize, out: &mut [f64]) {
        let f = (self.n - 1) as f64 / (self.kappa * self.n as f64);
        for c in 0..self.dim {
            out[c] = f * (self.nu[i * self.dim + c] - self.nu[j * self.dim + c]);
        }
    }

    /// Largest deviation of `(κ/(N-1)) Σ_j ν̄_ij` from `ν_i`.
    pub fn reconstruction_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut nb = vec![0.0; self.dim];
        for i in 0..self.n {
            let mut sum = vec![0.0; self.dim];
            for j in 0..self.n {
                self.nu_bar(i, j, &mut nb);
                sum.iter_mut().zip(&nb).for_each(|(s, v)| *s += v);
            }
            for c in 0..self.dim {
                let r = self.kappa / (self.n - 1) as f64 * sum[c];
                worst = worst.max((r - self.nu[i * self.dim + c]).abs());
            }
        }
        worst
    }

    fn accumulate(&self, q: &ParticleState, i: usize, partners: &[usize], scale: f64, out: &mut [f64]) {
        let dim = self.dim;
        let mut nb = vec![0.0; dim];
        let mut diff = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for &j in partners {
            if j == i {
                continue;
            }
            self.nu_bar(i, j, &mut nb);
            for c in 0..dim {
                diff[c] = q.position(j)[c] - q.position(i)[c];
            }
            (self.interaction)(&diff, &mut g);
            let a = self.a(i, j);
            for c in 0..dim {
                out[c] += scale * (nb[c] + a * g[c]);
            }
        }
    }

    fn check(&self, q: &ParticleState) -> Result<()> {
        if q.len() != self.n || q.dim() != self.dim {
            return Err(Error::Shape(format!(
                "state is {}×{}, model expects {}×{}",
                q.len(),
                q.dim(),
                self.n,
                self.dim
            )));
        }
        Ok(())
    }

    /// `(κ/(N-1)) Σ_{j≠i} (ν̄_ij + a_ij Γ(q_j - q_i))` for every agent.
    pub fn rhs(&self, q: &ParticleState) -> Result<Vec<f64>> {
        self.check(q)?;
        let all: Vec<usize> = (0..self.n).collect();
        let scale = self.kappa / (self.n - 1) as f64;
        let mut out = vec![0.0; self.n * self.dim];
        for i in 0..self.n {
            self.accumulate(q, i, &all, scale, &mut out[i * self.dim..(i + 1) * self.dim]);
        }
        Ok(out)
    }

    /// The undecomposed form `ν_i + (κ/(N-1)) Σ_{j≠i} a_ij Γ(q_j - q_i)`.
    pub fn rhs_original(&self, q: &ParticleState) -> Result<Vec<f64>> {
        self.check(q)?;
        let dim = self.dim;
        let scale = self.kappa / (self.n - 1) as f64;
        let mut out = self.nu.clone();
        let mut diff = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for i in 0..self.n {
            for j in (0..self.n).filter(|&j| j != i) {
                for c in 0..dim {
                    diff[c] = q.position(j)[c] - q.position(i)[c];
                }
                (self.interaction)(&diff, &mut g);
                for c in 0..dim {
                    out[i * dim + c] += scale * self.a(i, j) * g[c];
                }
            }
        }
        Ok(out)
    }

    /// Batched form with prefactor `κ/(p-1)` on both dispersion and interaction.
    pub fn rhs_batched(&self, q: &ParticleState, division: &BatchDivision) -> Result<Vec<f64>> {
        self.check(q)?;
        let mut out = vec![0.0; self.n * self.dim];
        for batch in division.batches() {
            let scale = self.kappa / (batch.len() - 1) as f64;
            for &i in batch {
                self.accumulate(q, i, batch, scale, &mut out[i * self.dim..(i + 1) * self.dim]);
            }
        }
        Ok(out)
    }

    /// One explicit Euler step, full (`p = None`) or random batch.
    pub fn step<R: Rng + ?Sized>(&self, q: &mut ParticleState, p: Option<usize>, dt: f64, rng: &mut R) -> Result<()> {
        let rate = match p {
            None => self.rhs(q)?,
            Some(p) => {
                let division = random_division(self.n, p, rng)?;
                self.rhs_batched(q, &division)?
            }
        };
        for (x, r) in q.positions_mut().iter_mut().zip(&rate) {
            *x += r * dt;
        }
        q.time += dt;
        q.check_finite()
    }
}

/// `(M2, D)`: mean squared norm `(1/N) Σ |q_j|²` and diameter `max |q_i - q_j|`.
pub fn consensus_functionals(q: &ParticleState) -> (f64, f64) {
    let n = q.len();
    let dim = q.dim();
    let m2 = q.positions().iter().map(|x| x * x).sum::<f64>() / n as f64;
    let d = if dim == 1 {
        let (lo, hi) = q
            .positions()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    } else {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let r2: f64 = (0..dim).map(|c| (q.position(i)[c] - q.position(j)[c]).powi(2)).sum();
                worst = worst.max(r2);
            }
        }
        worst.sqrt()
    };
    (m2, d)
}
