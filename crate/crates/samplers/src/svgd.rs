//! Stein variational gradient descent and its random batch version.

use rand::Rng;
use rbm_core::batch::random_division;
use rbm_core::kernel::VectorField;

use crate::error::{Error, Result};

/// Coordinates beyond this magnitude abort a run.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Gaussian kernel `K(x, y) = exp(-|x - y|²/h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub bandwidth: f64,
}

impl GaussianKernel {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Self { bandwidth })
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        (-r2 / self.bandwidth).exp()
    }

    /// `∇_y K(x, y) = 2(x - y)/h · K(x, y)`.
    pub fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let k = self.value(x, y);
        for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
            *o = 2.0 * (a - b) / self.bandwidth * k;
        }
    }
}

/// Particles, kernel and the score `∇V` with `V = -log π`.
#[derive(Clone)]
pub struct SvgdState {
    pub dim: usize,
    pub particles: Vec<f64>,
    pub kernel: GaussianKernel,
    grad_v: VectorField,
}

impl SvgdState {
    pub fn new(dim: usize, particles: Vec<f64>, kernel: GaussianKernel, grad_v: VectorField) -> Result<Self> {
        if dim == 0 || particles.is_empty() || !particles.len().is_multiple_of(dim) {
            return Err(rbm_core::Error::Shape(format!(
                "{} coordinates do not form particles of dimension {dim}",
                particles.len()
            ))
            .into());
        }
        Ok(Self {
            dim,
            particles,
            kernel,
            grad_v,
        })
    }

    /// Target `N(0, I)`.
    pub fn standard_normal(dim: usize, particles: Vec<f64>, kernel: GaussianKernel) -> Result<Self> {
        Self::new(
            dim,
            particles,
            kernel,
            std::sync::Arc::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x)),
        )
    }

    pub fn len(&self) -> usize {
        self.particles.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.particles[i * self.dim..(i + 1) * self.dim]
    }

    fn scores(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.particles.len()];
        for (x, o) in self.particles.chunks(self.dim).zip(s.chunks_mut(self.dim)) {
            (self.grad_v)(x, o);
        }
        s
    }

    /// `∇_y K(r_i, r_j) - K(r_i, r_j) ∇V(r_j)` added to `out` with weight `scale`.
    fn add_term(&self, i: usize, j: usize, scores: &[f64], scale: f64, out: &mut [f64]) {
        let d = self.dim;
        let (xi, xj) = (self.particle(i), self.particle(j));
        let k = self.kernel.value(xi, xj);
        let mut g = [0.0; 16];
        let mut g_vec;
        let g = if d <= 16 {
            &mut g[..d]
        } else {
            g_vec = vec![0.0; d];
            &mut g_vec[..]
        };
        self.kernel.grad_y(xi, xj, g);
        for c in 0..d {
            out[c] += scale * (g[c] - k * scores[j * d + c]);
        }
    }
}

/// Full SVGD velocity
/// `(1/N) Σ_j [∇_y K(r_i, r_j) - K(r_i, r_j) ∇V(r_j)]` of particle `i`.
pub fn svgd_velocity(i: usize, state: &SvgdState) -> Vec<f64> {
    let scores = state.scores();
    velocity_with(i, state, &scores)
}

fn velocity_with(i: usize, state: &SvgdState, scores: &[f64]) -> Vec<f64> {
    let n = state.len();
    let inv_n = 1.0 / n as f64;
    let mut v = vec![0.0; state.dim];
    state.add_term(i, i, scores, inv_n, &mut v);
    // same prefactor expression as the batch term with p = N
    if n == 1 {
        return v;
    }
    let off = batch_weight(n, n);
    let mut sum = vec![0.0; state.dim];
    for j in (0..n).filter(|&j| j != i) {
        state.add_term(i, j, scores, 1.0, &mut sum);
    }
    for (a, b) in v.iter_mut().zip(&sum) {
        *a += off * b;
    }
    v
}

/// All full-batch velocities.
pub fn svgd_velocities(state: &SvgdState) -> Vec<f64> {
    let scores = state.scores();
    (0..state.len()).flat_map(|i| velocity_with(i, state, &scores)).collect()
}

/// `(N-1)/(N(p-1))`.
fn batch_weight(n: usize, p: usize) -> f64 {
    (n - 1) as f64 / (n * (p - 1)) as f64
}

/// Random batch velocities for one division into batches of size `p`:
/// the self term plus `(N-1)/(N(p-1))` times the in-batch sum.
pub fn rbm_svgd_velocities<R: Rng + ?Sized>(state: &SvgdState, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    let n = state.len();
    let d = state.dim;
    let division = random_division(n, p, rng)?;
    let scores = state.scores();
    let inv_n = 1.0 / n as f64;
    let mut v = vec![0.0; n * d];
    let mut sum = vec![0.0; d];
    for batch in division.batches() {
        for &i in batch {
            let out = &mut v[i * d..(i + 1) * d];
            state.add_term(i, i, &scores, inv_n, out);
            if batch.len() < 2 {
                continue;
            }
            let weight = batch_weight(n, batch.len());
            sum.fill(0.0);
            for &j in batch.iter().filter(|&&j| j != i) {
                state.add_term(i, j, &scores, 1.0, &mut sum);
            }
            for (a, b) in out.iter_mut().zip(&sum) {
                *a += weight * b;
            }
        }
    }
    Ok(v)
}

/// Step sizes `η_k` for RBM-SVGD.
#[derive(Debug, Clone, PartialEq)]
pub enum SvgdSchedule {
    Constant(f64),
    /// `η_k = η0/k`.
    Inverse(f64),
    /// Per-coordinate `η/√(ε + Σ_{l≤k} v_l²)` from the accumulated squared
    /// velocities.
    AdaGrad { eta: f64, epsilon: f64 },
}

impl SvgdSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SvgdSchedule::Constant(e) | SvgdSchedule::Inverse(e) => e >= 0.0 && e.is_finite(),
            SvgdSchedule::AdaGrad { eta, epsilon } => eta >= 0.0 && epsilon > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid step schedule {self:?}")))
        }
    }
}

/// An SVGD run: state, schedule and step counter.
pub struct Svgd {
    pub state: SvgdState,
    schedule: SvgdSchedule,
    accumulated: Vec<f64>,
    steps: u64,
}

impl Svgd {
    pub fn new(state: SvgdState, schedule: SvgdSchedule) -> Result<Self> {
        schedule.validate()?;
        let accumulated = vec![0.0; state.particles.len()];
        Ok(Self {
            state,
            schedule,
            accumulated,
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One explicit Euler step; `p = None` uses the full-batch velocity.
    pub fn step<R: Rng + ?Sized>(&mut self, p: Option<usize>, rng: &mut R) -> Result<()> {
        let v = match p {
            Some(p) => rbm_svgd_velocities(&self.state, p, rng)?,
            None => svgd_velocities(&self.state),
        };
        self.apply(&v)
    }

    fn apply(&mut self, v: &[f64]) -> Result<()> {
        self.steps += 1;
        let k = self.steps as f64;
        match self.schedule {
            SvgdSchedule::Constant(eta) => {
                for (x, dv) in self.state.particles.iter_mut().zip(v) {
                    *x += eta * dv;
                }
            }
            SvgdSchedule::Inverse(eta0) => {
                let eta = eta0 / k;
                for (x, dv) in self.state.particles.iter_mut().zip(v) {
                    *x += eta * dv;
                }
            }
            SvgdSchedule::AdaGrad { eta, epsilon } => {
                for ((x, dv), acc) in self.state.particles.iter_mut().zip(v).zip(&mut self.accumulated) {
                    *acc += dv * dv;
                    *x += eta / (epsilon + *acc).sqrt() * dv;
                }
            }
        }
        let max = self.state.particles.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(max <= DIVERGENCE_BOUND) {
            return Err(Error::Diverged { step: self.steps, max });
        }
        Ok(())
    }
}

/// One RBM-SVGD step with constant step `eta`.
pub fn rbm_svgd_step<R: Rng + ?Sized>(state: &mut SvgdState, p: usize, eta: f64, rng: &mut R) -> Result<()> {
    let v = rbm_svgd_velocities(state, p, rng)?;
    for (x, dv) in state.particles.iter_mut().zip(&v) {
        *x += eta * dv;
    }
    let max = state.particles.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(max <= DIVERGENCE_BOUND) {
        return Err(Error::Diverged { step: 0, max });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbm_core::batch::BatchDivision;
    use rbm_core::RngStream;

    fn kernel() -> GaussianKernel {
        GaussianKernel::new(1.0).unwrap()
    }

    #[test]
    fn single_particle_velocity() {
        let s = SvgdState::standard_normal(1, vec![1.0], kernel()).unwrap();
        assert_eq!(svgd_velocity(0, &s), vec![-1.0]);
        let s = SvgdState::standard_normal(2, vec![0.5, -2.0], kernel()).unwrap();
        assert_eq!(svgd_velocity(0, &s), vec![-0.5, 2.0]);
    }

    #[test]
    fn kernel_is_symmetric() {
        let k = GaussianKernel::new(0.7).unwrap();
        let mut rng = RngStream::new(0, 0).rng();
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            assert!((k.value(&x, &y) - k.value(&y, &x)).abs() < 1e-12);
            assert!(k.value(&x, &x) > 0.0);
        }
    }

    #[test]
    fn symmetric_configuration_gives_antisymmetric_field() {
        let xs = vec![-1.3, -0.4, 0.4, 1.3];
        let s = SvgdState::standard_normal(1, xs, kernel()).unwrap();
        let v = svgd_velocities(&s);
        for i in 0..4 {
            assert!((v[i] + v[3 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_particle_fixed_point() {
        // velocity of the particle at +c for the pair ±c, h = 1
        let f = |c: f64| {
            let s = SvgdState::standard_normal(1, vec![c, -c], kernel()).unwrap();
            svgd_velocity(0, &s)[0]
        };
        let (mut lo, mut hi) = (0.1, 2.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        assert!((c - (5f64.ln() / 4.0).sqrt()).abs() < 1e-12);
        let s = SvgdState::standard_normal(1, vec![c, -c], kernel()).unwrap();
        for v in svgd_velocities(&s) {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn batch_term_is_unbiased_over_divisions() {
        // N = 4, p = 2: the three pairings are equally likely
        let xs = vec![0.3, -1.1, 0.8, 2.0, -0.2, 0.5, 1.4, -0.9];
        let s = SvgdState::standard_normal(2, xs, kernel()).unwrap();
        let full = svgd_velocities(&s);
        let pairings = [
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 3]],
            vec![vec![0, 3], vec![1, 2]],
        ];
        let scores = s.scores();
        let mut mean = [0.0; 8];
        for b in &pairings {
            let division = BatchDivision::from_batches(4, b.clone()).unwrap();
            for batch in division.batches() {
                for &i in batch {
                    let mut out = vec![0.0; 2];
                    s.add_term(i, i, &scores, 0.25, &mut out);
                    for &j in batch.iter().filter(|&&j| j != i) {
                        s.add_term(i, j, &scores, batch_weight(4, 2), &mut out);
                    }
                    for c in 0..2 {
                        mean[2 * i + c] += out[c] / 3.0;
                    }
                }
            }
        }
        for (a, b) in mean.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn full_batch_division_matches_svgd_exactly() {
        let xs: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        let mut a = Svgd::new(
            SvgdState::standard_normal(1, xs.clone(), kernel()).unwrap(),
            SvgdSchedule::Constant(0.1),
        )
        .unwrap();
        let mut b = Svgd::new(SvgdState::standard_normal(1, xs, kernel()).unwrap(), SvgdSchedule::Constant(0.1))
            .unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..50 {
            a.step(Some(12), &mut rng).unwrap();
            b.step(None, &mut rng).unwrap();
        }
        assert_eq!(a.state.particles, b.state.particles);
    }

    #[test]
    fn zero_step_leaves_state_unchanged() {
        let xs = vec![0.1, 0.5, -0.7, 1.9];
        let mut s = SvgdState::standard_normal(1, xs.clone(), kernel()).unwrap();
        rbm_svgd_step(&mut s, 2, 0.0, &mut RngStream::new(2, 0).rng()).unwrap();
        assert_eq!(s.particles, xs);
    }

    #[test]
    fn divergence_is_reported() {
        let s = SvgdState::new(
            1,
            vec![1.0, 2.0],
            kernel(),
            std::sync::Arc::new(|x: &[f64], o: &mut [f64]| o[0] = -x[0].powi(3) * 1e3),
        )
        .unwrap();
        let mut run = Svgd::new(s, SvgdSchedule::Constant(10.0)).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let err = (0..100).find_map(|_| run.step(Some(2), &mut rng).err()).unwrap();
        assert!(err.to_string().contains("reduce the step size"));
    }

    #[test]
    fn schedules() {
        let s = SvgdState::standard_normal(1, vec![2.0], kernel()).unwrap();
        let mut inv = Svgd::new(s.clone(), SvgdSchedule::Inverse(0.5)).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        inv.step(None, &mut rng).unwrap();
        assert!((inv.state.particles[0] - (2.0 - 0.5 * 2.0)).abs() < 1e-15);
        inv.step(None, &mut rng).unwrap();
        assert!((inv.state.particles[0] - (1.0 - 0.25)).abs() < 1e-15);
        let mut ada = Svgd::new(s, SvgdSchedule::AdaGrad { eta: 0.1, epsilon: 1e-8 }).unwrap();
        ada.step(None, &mut rng).unwrap();
        // first AdaGrad step moves each coordinate by about η
        assert!((ada.state.particles[0] - 1.9).abs() < 1e-6);
        assert!(SvgdSchedule::Constant(-1.0).validate().is_err());
    }
}
