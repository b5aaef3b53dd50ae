//! Splitting parameter, cutoffs and frequency batch size.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tail bound used to size the exact Fourier sum.
pub const FOURIER_TAIL: f64 = 1e-12;

/// `√α r_c` for the default real-space cutoff; `erfc(3.5) ≈ 7e-7`.
pub const REAL_SPACE_REACH: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaldParams {
    /// Splitting parameter in `erfc(√α r)/r`.
    pub alpha: f64,
    /// Real-space cutoff radius.
    pub r_c: f64,
    /// Exact Fourier sums run over `0 < |m| ≤ m_max`, i.e. `k_c = 2π m_max/L`.
    pub m_max: u32,
    /// Number of frequencies per random batch.
    pub p: usize,
}

impl EwaldParams {
    /// Defaults for `n` particles in a cube of side `box_length`:
    /// `√α = (N/L³)^{1/3}`, `r_c = min(3.5/√α, 0.49 L)` and `m_max` from the
    /// Gaussian tail bound.
    pub fn for_box(n: usize, box_length: f64, p: usize) -> Self {
        let sqrt_alpha = (n as f64 / box_length.powi(3)).cbrt();
        Self::with_alpha(sqrt_alpha * sqrt_alpha, box_length, p)
    }

    /// Default cutoffs for a given `α`.
    pub fn with_alpha(alpha: f64, box_length: f64, p: usize) -> Self {
        let r_c = (REAL_SPACE_REACH / alpha.sqrt()).min(0.49 * box_length);
        Self {
            alpha,
            r_c,
            m_max: fourier_cutoff_index(alpha, box_length, FOURIER_TAIL),
            p,
        }
    }

    /// Fourier cutoff `k_c = 2π m_max/L`.
    pub fn k_c(&self, box_length: f64) -> f64 {
        2.0 * PI * self.m_max as f64 / box_length
    }

    pub fn validate(&self, box_length: f64) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.r_c > 0.0) || self.r_c >= 0.5 * box_length {
            return Err(rbm_core::Error::CutoffTooLarge {
                cutoff: self.r_c,
                half: 0.5 * box_length,
            }
            .into());
        }
        if self.m_max == 0 {
            return Err(Error::InvalidParameter("m_max must be at least 1".into()));
        }
        if self.p < 1 {
            return Err(Error::InvalidParameter("frequency batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Smallest `m` with `exp(-k²/4α) ≤ tail` for `k = 2π m/L`.
pub fn fourier_cutoff_index(alpha: f64, box_length: f64, tail: f64) -> u32 {
    (box_length * (alpha * (1.0 / tail).ln()).sqrt() / PI).ceil() as u32
}
