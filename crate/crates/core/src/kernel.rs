//! Pairwise interaction kernels.
//!
//! A kernel is the force form `K: ℝ^d → ℝ^d` evaluated on the displacement
//! `r_i - r_j`. It may carry a split `K = K1 + K2` into a short-range part
//! `K1` that vanishes beyond `r0` and a bounded smooth part `K2`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A vector field `ℝ^d → ℝ^d`, written into the output slice.
pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Radial force magnitude `f(r) = -φ'(r)` of a central potential.
pub type RadialMagnitude = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct KernelSplit {
    pub r0: f64,
    pub short: VectorField,
    pub smooth: VectorField,
}

/// Interaction kernel with optional short/smooth split and singularity guard.
#[derive(Clone)]
pub struct KernelSpec {
    force: VectorField,
    split: Option<KernelSplit>,
    clamp_radius: Option<f64>,
    clamps: Arc<AtomicU64>,
    is_zero: bool,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("split_radius", &self.split.as_ref().map(|s| s.r0))
            .field("clamp_radius", &self.clamp_radius)
            .field("is_zero", &self.is_zero)
            .finish()
    }
}

impl KernelSpec {
    pub fn new<F>(force: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            force: Arc::new(force),
            split: None,
            clamp_radius: None,
            clamps: Arc::new(AtomicU64::new(0)),
            is_zero: false,
        }
    }

    /// `K ≡ 0`.
    pub fn zero() -> Self {
        let mut k = Self::new(|_, out| out.fill(0.0));
        k.is_zero = true;
        k
    }

    /// `K ≡ c` (the same vector for every displacement).
    pub fn constant(c: Vec<f64>) -> Self {
        Self::new(move |_, out| out.copy_from_slice(&c))
    }

    /// `K(x) = scale · x`.
    pub fn linear(scale: f64) -> Self {
        Self::new(move |x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = scale * xi;
            }
        })
    }

    /// Component-wise `K(x) = sin(x)`, the Lipschitz toy kernel.
    pub fn sine() -> Self {
        Self::new(|x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = xi.sin();
            }
        })
    }

    /// Gaussian interaction `K(x) = x · exp(-|x|²/2)`, i.e. the force of the
    /// repulsive potential `exp(-|x|²/2)`.
    pub fn gaussian() -> Self {
        Self::new(|x, out| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let g = (-0.5 * r2).exp();
            for (o, xi) in out.iter_mut().zip(x) {
                *o = g * xi;
            }
        })
    }

    /// Central force `K(x) = f(|x|) x/|x|`.
    pub fn radial(magnitude: RadialMagnitude) -> Self {
        Self::new(move |x, out| radial_eval(&magnitude, x, out))
    }

    /// `K(x) = x/|x|²`, the force of `-ln|x|` (in 1D simply `1/x`).
    pub fn inverse_distance() -> Self {
        Self::radial(Arc::new(|r| 1.0 / r))
    }

    /// Central force split at `r0`: the smooth part continues the force
    /// linearly inside `r0` (the force of a quadratic continuation of the
    /// potential with matching value and slope), the short part is the
    /// remainder and vanishes identically for `|x| ≥ r0`.
    pub fn radial_split(magnitude: RadialMagnitude, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "split radius must be positive, got {r0}"
            )));
        }
        let inner_slope = magnitude(r0) / r0;
        let smooth_mag = magnitude.clone();
        let smooth: VectorField = Arc::new(move |x, out| {
            let r = norm(x);
            if r >= r0 {
                radial_eval(&smooth_mag, x, out);
            } else {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = inner_slope * xi;
                }
            }
        });
        let short_mag = magnitude.clone();
        let short: VectorField = Arc::new(move |x, out| {
            let r = norm(x);
            if r >= r0 {
                out.fill(0.0);
            } else {
                let f = short_mag(r) / r;
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = (f - inner_slope) * xi;
                }
            }
        });
        Ok(Self::radial(magnitude).with_split(r0, short, smooth))
    }

    pub fn with_split(mut self, r0: f64, short: VectorField, smooth: VectorField) -> Self {
        self.split = Some(KernelSplit { r0, short, smooth });
        self
    }

    /// Guard a singular kernel: displacements shorter than `radius` are
    /// rescaled to `radius` before evaluation and counted.
    pub fn with_clamp(mut self, radius: f64) -> Self {
        self.clamp_radius = Some(radius);
        self
    }

    pub fn split(&self) -> Option<&KernelSplit> {
        self.split.as_ref()
    }

    pub fn split_radius(&self) -> Option<f64> {
        self.split.as_ref().map(|s| s.r0)
    }

    pub fn clamp_radius(&self) -> Option<f64> {
        self.clamp_radius
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Number of clamped evaluations so far (shared between clones).
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    pub fn reset_clamp_count(&self) {
        self.clamps.store(0, Ordering::Relaxed);
    }

    /// Evaluate the full kernel `K(x)`.
    #[inline]
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.guarded(&self.force, x, out)
    }

    /// Evaluate the short-range part `K1(x)`; zero if the kernel is unsplit.
    #[inline]
    pub fn eval_short(&self, x: &[f64], out: &mut [f64]) {
        match &self.split {
            Some(s) => (s.short)(x, out),
            None => out.fill(0.0),
        }
    }

    /// Evaluate the smooth part `K2(x)`; the full kernel if unsplit.
    #[inline]
    pub fn eval_smooth(&self, x: &[f64], out: &mut [f64]) {
        match &self.split {
            Some(s) => (s.smooth)(x, out),
            None => self.eval(x, out),
        }
    }

    fn guarded(&self, f: &VectorField, x: &[f64], out: &mut [f64]) {
        if let Some(eps) = self.clamp_radius {
            let r = norm(x);
            if r < eps {
                self.clamps.fetch_add(1, Ordering::Relaxed);
                let mut y = [0.0; 8];
                let y = &mut y[..x.len()];
                if r > 0.0 {
                    for (yi, xi) in y.iter_mut().zip(x) {
                        *yi = xi * eps / r;
                    }
                } else {
                    y[0] = eps;
                }
                f(y, out);
                return;
            }
        }
        f(x, out)
    }
}

#[inline]
fn radial_eval(magnitude: &RadialMagnitude, x: &[f64], out: &mut [f64]) {
    let r = norm(x);
    let f = magnitude(r) / r;
    for (o, xi) in out.iter_mut().zip(x) {
        *o = f * xi;
    }
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lj_magnitude() -> RadialMagnitude {
        Arc::new(|r: f64| 24.0 * (2.0 * r.powi(-13) - r.powi(-7)))
    }

    #[test]
    fn split_short_part_vanishes_beyond_radius() {
        let k = KernelSpec::radial_split(lj_magnitude(), 1.2).unwrap();
        let mut out = [1.0; 3];
        for s in 0..50 {
            let r = 1.2 + 1.2 * s as f64 / 49.0;
            let x = [r * 0.6, -r * 0.8, 0.0];
            k.eval_short(&x, &mut out);
            assert_eq!(out, [0.0; 3]);
        }
    }

    #[test]
    fn split_parts_reassemble_kernel() {
        let k = KernelSpec::radial_split(lj_magnitude(), 1.2).unwrap();
        let (mut full, mut a, mut b) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        for s in 1..200 {
            let r = 0.8 + 2.0 * s as f64 / 200.0;
            let x = [r / 3f64.sqrt(); 3];
            k.eval(&x, &mut full);
            k.eval_short(&x, &mut a);
            k.eval_smooth(&x, &mut b);
            let fnorm = norm(&full);
            for c in 0..3 {
                assert!((full[c] - a[c] - b[c]).abs() <= 1e-12 * (1.0 + fnorm));
            }
        }
    }

    #[test]
    fn smooth_part_is_bounded_at_origin() {
        let k = KernelSpec::radial_split(Arc::new(|r: f64| 1.0 / r), 0.01).unwrap();
        let mut out = [0.0];
        k.eval_smooth(&[1e-9], &mut out);
        assert!(out[0].abs() < 1e-4);
        k.eval_smooth(&[0.01 - 1e-12], &mut out);
        assert!((out[0] - 100.0).abs() < 1e-6);
    }

    #[test]
    fn clamp_is_counted() {
        let k = KernelSpec::inverse_distance().with_clamp(1e-3);
        let mut out = [0.0];
        k.eval(&[1e-5], &mut out);
        assert!((out[0] - 1e3).abs() < 1e-9);
        k.eval(&[0.5], &mut out);
        assert_eq!(out[0], 2.0);
        k.eval(&[0.0], &mut out);
        assert_eq!(k.clamp_count(), 2);
    }

    #[test]
    fn unsplit_kernel_has_no_short_part() {
        let k = KernelSpec::linear(1.0);
        let mut out = [9.0, 9.0];
        k.eval_short(&[1.0, 2.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
        k.eval_smooth(&[1.0, 2.0], &mut out);
        assert_eq!(out, [1.0, 2.0]);
    }
}
