//! Gibbs measures `π ∝ exp(-β H)` with
//! `H = Σ_i w V(x_i) + Σ_{i<j} w² φ(x_i - x_j)` and `φ = φ1 + φ2`.

use std::sync::Arc;

use rbm_core::kernel::VectorField;

use crate::error::{Error, Result};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Smooth, bounded, long-range pair part `φ1` and its gradient.
#[derive(Clone)]
pub struct SmoothPair {
    pub value: ScalarField,
    pub grad: VectorField,
}

/// Short-range radial pair part `φ2(|r|)`, zero for `|r| ≥ cutoff`.
#[derive(Clone)]
pub struct ShortRangePair {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub cutoff: f64,
}

#[derive(Clone)]
pub struct GibbsTarget {
    pub dim: usize,
    pub n: usize,
    pub beta: f64,
    pub w: f64,
    potential: ScalarField,
    potential_grad: VectorField,
    /// `c` when `V(x) = c|x|²/2`, which allows exact proposals.
    harmonic: Option<f64>,
    smooth: Option<SmoothPair>,
    short: Option<ShortRangePair>,
}

impl GibbsTarget {
    pub fn new(
        dim: usize,
        n: usize,
        beta: f64,
        w: f64,
        potential: ScalarField,
        potential_grad: VectorField,
    ) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one particle".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {w}")));
        }
        Ok(Self {
            dim,
            n,
            beta,
            w,
            potential,
            potential_grad,
            harmonic: None,
            smooth: None,
            short: None,
        })
    }

    /// `V(x) = c|x|²/2`.
    pub fn harmonic(dim: usize, n: usize, beta: f64, w: f64, c: f64) -> Result<Self> {
        let mut t = Self::new(
            dim,
            n,
            beta,
            w,
            Arc::new(move |x| 0.5 * c * x.iter().map(|v| v * v).sum::<f64>()),
            Arc::new(move |x, out| {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
            }),
        )?;
        t.harmonic = Some(c);
        Ok(t)
    }

    pub fn with_smooth_pair(mut self, smooth: SmoothPair) -> Self {
        self.smooth = Some(smooth);
        self
    }

    pub fn with_short_range(mut self, short: ShortRangePair) -> Result<Self> {
        if !(short.cutoff > 0.0 && short.cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "short-range cutoff must be positive, got {}",
                short.cutoff
            )));
        }
        self.short = Some(short);
        Ok(self)
    }

    /// Eigenvalue gas of the Dyson Brownian motion:
    /// `β = w = 1`, `V(x) = (N-1)x²/2`, `φ(r) = -ln|r|`, split at `r0`.
    pub fn dyson(n: usize, r0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("the Dyson gas needs N ≥ 2".into()));
        }
        let (smooth, short) = log_split(r0)?;
        Self::harmonic(1, n, 1.0, 1.0, (n - 1) as f64)?
            .with_smooth_pair(smooth)
            .with_short_range(short)
    }

    pub fn potential(&self, x: &[f64]) -> f64 {
        (self.potential)(x)
    }

    pub fn potential_grad(&self, x: &[f64], out: &mut [f64]) {
        (self.potential_grad)(x, out)
    }

    pub fn harmonic_constant(&self) -> Option<f64> {
        self.harmonic
    }

    pub fn smooth(&self) -> Option<&SmoothPair> {
        self.smooth.as_ref()
    }

    pub fn short(&self) -> Option<&ShortRangePair> {
        self.short.as_ref()
    }

    /// `φ2(|r|)`, zero beyond the cutoff or when there is no short part.
    pub fn short_value(&self, r: f64) -> f64 {
        match &self.short {
            Some(s) if r < s.cutoff => (s.value)(r),
            _ => 0.0,
        }
    }

    /// `H` of a configuration stored row-major.
    pub fn energy(&self, positions: &[f64]) -> f64 {
        let d = self.dim;
        let n = positions.len() / d;
        let mut h = 0.0;
        let mut r = [0.0; 3];
        for i in 0..n {
            let xi = &positions[i * d..(i + 1) * d];
            h += self.w * self.potential(xi);
            for j in (i + 1)..n {
                let xj = &positions[j * d..(j + 1) * d];
                for c in 0..d {
                    r[c] = xi[c] - xj[c];
                }
                let r = &r[..d];
                let mut pair = 0.0;
                if let Some(s) = &self.smooth {
                    pair += (s.value)(r);
                }
                pair += self.short_value(r.iter().map(|v| v * v).sum::<f64>().sqrt());
                h += self.w * self.w * pair;
            }
        }
        h
    }
}

/// `φ(r) = -ln|r|` split at `r0`: the smooth part continues inside `r0` by
/// the quadratic `-ln r0 + 1/2 - |r|²/(2 r0²)`, which matches value and
/// slope at `r0`; the short part is the remainder.
pub fn log_split(r0: f64) -> Result<(SmoothPair, ShortRangePair)> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("split radius must be positive, got {r0}")));
    }
    let inner = move |r2: f64| -r0.ln() + 0.5 - r2 / (2.0 * r0 * r0);
    let smooth = SmoothPair {
        value: Arc::new(move |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 >= r0 * r0 {
                -0.5 * r2.ln()
            } else {
                inner(r2)
            }
        }),
        grad: Arc::new(move |x, out| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let s = if r2 >= r0 * r0 { -1.0 / r2 } else { -1.0 / (r0 * r0) };
            for (o, xi) in out.iter_mut().zip(x) {
                *o = s * xi;
            }
        }),
    };
    let short = ShortRangePair {
        value: Arc::new(move |r| -r.ln() - inner(r * r)),
        cutoff: r0,
    };
    Ok((smooth, short))
}
