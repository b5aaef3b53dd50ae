use crate::error::{Error, Result};

/// Weighted point cloud of `M` samples in `d` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    samples: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, samples: Vec<f64>) -> Result<Self> {
        if dim == 0 || !samples.len().is_multiple_of(dim) || samples.is_empty() {
            return Err(Error::Shape(format!("{} values do not form rows of {dim}", samples.len())));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        Ok(Self {
            dim,
            samples,
            weights: None,
        })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    /// Attach weights; they must be nonnegative and sum to one within 1e-12.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Shape(format!("{} weights for {} samples", weights.len(), self.len())));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights must be nonnegative and sum to 1, sum is {total}"
            )));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The one-dimensional marginal of coordinate `c`.
    pub fn marginal(&self, c: usize) -> Self {
        Self {
            dim: 1,
            samples: self.samples.iter().skip(c).step_by(self.dim).copied().collect(),
            weights: self.weights.clone(),
        }
    }

    /// Samples sorted ascending with their weights.
    fn sorted(&self) -> Vec<(f64, f64)> {
        let m = self.len();
        let mut pts: Vec<(f64, f64)> = match &self.weights {
            Some(w) => self.samples.iter().copied().zip(w.iter().copied()).collect(),
            None => self.samples.iter().map(|&x| (x, 1.0 / m as f64)).collect(),
        };
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }
}

fn require_1d(a: &EmpiricalMeasure) -> Result<()> {
    if a.dim != 1 {
        return Err(Error::Shape(format!("W1 needs one-dimensional samples, got d={}", a.dim)));
    }
    Ok(())
}

/// `W1(a, b) = ∫ |F_a - F_b| dx` for two one-dimensional empirical measures.
pub fn wasserstein1_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    require_1d(a)?;
    require_1d(b)?;
    let (pa, pb) = (a.sorted(), b.sorted());
    let (mut ia, mut ib) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    let mut x_prev: Option<f64> = None;
    while ia < pa.len() || ib < pb.len() {
        let x = match (pa.get(ia), pb.get(ib)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        if let Some(xp) = x_prev {
            total += (fa - fb).abs() * (x - xp);
        }
        while ia < pa.len() && pa[ia].0 == x {
            fa += pa[ia].1;
            ia += 1;
        }
        while ib < pb.len() && pb[ib].0 == x {
            fb += pb[ib].1;
            ib += 1;
        }
        x_prev = Some(x);
    }
    Ok(total)
}

// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        s += w * (f(m - h * x) + f(m + h * x));
    }
    s * h
}

/// `W1` between a one-dimensional empirical measure and a distribution with
/// continuous CDF `cdf`, whose mass lies in `[lo, hi]` (up to negligible
/// tails). Between consecutive samples the empirical CDF is constant and
/// `|c - F|` is integrated by Gauss–Legendre; the tails beyond the extreme
/// samples are integrated on geometrically growing panels. `cdf` must be
/// nondecreasing.
pub fn wasserstein1_to_cdf<F>(a: &EmpiricalMeasure, cdf: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    require_1d(a)?;
    let pts = a.sorted();
    let x_min = pts[0].0.max(lo);
    let x_max = pts[pts.len() - 1].0.min(hi);
    let mut total = 0.0;

    let tail = |from: f64, to: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        if to <= from {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut width = ((to - from) * 1e-6).max(1e-12);
        let mut x = from;
        while x < to {
            let next = (x + width).min(to);
            acc += gauss_legendre(&f, x, next);
            x = next;
            width *= 1.5;
        }
        acc
    };
    // left tail: ∫_lo^{x_min} F, integrated outward from x_min
    total += tail(0.0, x_min - lo, &|s: f64| cdf(x_min - s));
    total += tail(x_max, hi, &|x: f64| 1.0 - cdf(x));

    let mut level = 0.0;
    let mut k = 0;
    while k < pts.len() {
        let x = pts[k].0;
        while k < pts.len() && pts[k].0 == x {
            level += pts[k].1;
            k += 1;
        }
        if k < pts.len() {
            let (a, b) = (x.max(lo), pts[k].0.min(hi));
            if b > a {
                let gap = |t: f64| (level - cdf(t)).abs();
                // split at the crossing F = level so each panel is smooth
                if (cdf(a) - level) * (cdf(b) - level) < 0.0 {
                    let (mut l, mut r) = (a, b);
                    for _ in 0..100 {
                        let mid = 0.5 * (l + r);
                        if mid <= l || mid >= r {
                            break;
                        }
                        if cdf(mid) < level {
                            l = mid;
                        } else {
                            r = mid;
                        }
                    }
                    total += gauss_legendre(&gap, a, l) + gauss_legendre(&gap, l, b);
                } else {
                    total += gauss_legendre(&gap, a, b);
                }
            }
        }
    }
    Ok(total)
}
