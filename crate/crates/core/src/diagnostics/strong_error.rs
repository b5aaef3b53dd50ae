use crate::error::{Error, Result};

/// Root-mean-square distance between coupled trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongError {
    /// `√(mean over replicas and particles of |a - b|²)` at each recorded time.
    pub per_time: Vec<f64>,
    /// Supremum over recorded times.
    pub sup: f64,
}

/// Strong error between two ensembles of trajectories sharing initial data
/// and noise. `a[r][t]` holds the flattened coordinates of replica `r` at
/// recorded time `t` (positions, optionally followed by velocities), with
/// `dim` coordinates per particle.
pub fn strong_error(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>], dim: usize) -> Result<StrongError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Shape(format!("{} vs {} replicas", a.len(), b.len())));
    }
    let times = a[0].len();
    let mut sums = vec![0.0; times];
    let mut particles = 0;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != times || rb.len() != times {
            return Err(Error::Shape("replicas record different numbers of times".into()));
        }
        for (t, (xa, xb)) in ra.iter().zip(rb).enumerate() {
            if xa.len() != xb.len() || xa.len() % dim != 0 {
                return Err(Error::Shape(format!("snapshot lengths {} and {}", xa.len(), xb.len())));
            }
            particles = xa.len() / dim;
            sums[t] += xa.iter().zip(xb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
    }
    let denom = (a.len() * particles.max(1)) as f64;
    let per_time: Vec<f64> = sums.iter().map(|s| (s / denom).sqrt()).collect();
    let sup = per_time.iter().copied().fold(0.0, f64::max);
    Ok(StrongError { per_time, sup })
}
