//! Particle configurations.

use crate::error::{Error, Result};

/// Positions (and optionally velocities) of `N` particles in `d` dimensions.
///
/// Coordinates are stored row-major: particle `i` occupies
/// `positions[i * dim..(i + 1) * dim]`. When a box length is set the box is
/// periodic and positions are kept wrapped into `[0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    dim: usize,
    positions: Vec<f64>,
    velocities: Option<Vec<f64>>,
    box_length: Option<f64>,
    pub time: f64,
}

impl ParticleState {
    pub fn new(dim: usize, positions: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if !positions.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} coordinates do not split into rows of {dim}",
                positions.len()
            )));
        }
        if let Some(k) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                time: 0.0,
                particle: k / dim,
                coordinate: k % dim,
            });
        }
        Ok(Self {
            dim,
            positions,
            velocities: None,
            box_length: None,
            time: 0.0,
        })
    }

    /// One-dimensional state from scalar positions.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    pub fn with_velocities(mut self, velocities: Vec<f64>) -> Result<Self> {
        if velocities.len() != self.positions.len() {
            return Err(Error::Shape(format!(
                "velocities have {} entries, positions {}",
                velocities.len(),
                self.positions.len()
            )));
        }
        self.velocities = Some(velocities);
        Ok(self)
    }

    pub fn with_zero_velocities(self) -> Self {
        let n = self.positions.len();
        self.with_velocities(vec![0.0; n]).expect("matching shape")
    }

    /// Make the box periodic with side `box_length` and wrap all positions.
    pub fn periodic(mut self, box_length: f64) -> Result<Self> {
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        self.box_length = Some(box_length);
        self.wrap();
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn box_length(&self) -> Option<f64> {
        self.box_length
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    pub fn velocities(&self) -> Option<&[f64]> {
        self.velocities.as_deref()
    }

    pub fn velocities_mut(&mut self) -> Option<&mut [f64]> {
        self.velocities.as_deref_mut()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> Option<&[f64]> {
        self.velocities
            .as_ref()
            .map(|v| &v[i * self.dim..(i + 1) * self.dim])
    }

    /// Split borrow of positions and velocities.
    pub fn phase_mut(&mut self) -> Result<(&mut [f64], &mut [f64])> {
        match self.velocities.as_mut() {
            Some(v) => Ok((&mut self.positions, v)),
            None => Err(Error::MissingVelocities),
        }
    }

    /// Displacement `r_i - r_j`, using the minimum image when periodic.
    pub fn displacement(&self, i: usize, j: usize, out: &mut [f64]) {
        let (a, b) = (self.position(i), self.position(j));
        for k in 0..self.dim {
            out[k] = a[k] - b[k];
        }
        if let Some(l) = self.box_length {
            minimum_image(out, l);
        }
    }

    /// Wrap positions into `[0, L)` (no-op for open boundaries).
    pub fn wrap(&mut self) {
        if let Some(l) = self.box_length {
            for x in &mut self.positions {
                *x = wrap_coordinate(*x, l);
            }
        }
    }

    /// Fail with the first non-finite coordinate, if any.
    pub fn check_finite(&self) -> Result<()> {
        let bad = self.positions.iter().position(|x| !x.is_finite()).or_else(|| {
            self.velocities
                .as_ref()
                .and_then(|v| v.iter().position(|x| !x.is_finite()))
        });
        match bad {
            Some(k) => Err(Error::NonFinite {
                time: self.time,
                particle: k / self.dim,
                coordinate: k % self.dim,
            }),
            None => Ok(()),
        }
    }

    /// Typical inter-particle distance: `(V/N)^{1/d}` in a periodic box,
    /// otherwise the same formula with the bounding box of the particles.
    pub fn typical_spacing(&self) -> f64 {
        let n = self.len().max(1) as f64;
        let volume = match self.box_length {
            Some(l) => l.powi(self.dim as i32),
            None => {
                let mut v = 1.0;
                for k in 0..self.dim {
                    let (lo, hi) = self
                        .positions
                        .iter()
                        .skip(k)
                        .step_by(self.dim)
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                            (lo.min(x), hi.max(x))
                        });
                    v *= (hi - lo).max(f64::MIN_POSITIVE);
                }
                v
            }
        };
        (volume / n).powf(1.0 / self.dim as f64)
    }

    /// Kinetic energy `Σ |v|²/2` (unit masses).
    pub fn kinetic_energy(&self) -> Option<f64> {
        self.velocities
            .as_ref()
            .map(|v| 0.5 * v.iter().map(|x| x * x).sum::<f64>())
    }
}

/// Wrap each component of a displacement into `[-L/2, L/2)`.
#[inline]
pub fn minimum_image(dx: &mut [f64], box_length: f64) {
    let half = 0.5 * box_length;
    for x in dx.iter_mut() {
        // differences of wrapped coordinates need at most one shift
        if *x >= half {
            *x -= box_length;
        } else if *x < -half {
            *x += box_length;
        } else {
            continue;
        }
        if *x >= half || *x < -half {
            *x -= box_length * ((*x + half) / box_length).floor();
        }
    }
}

#[inline]
pub fn wrap_coordinate(x: f64, box_length: f64) -> f64 {
    let mut y = x - box_length * (x / box_length).floor();
    // floor can land exactly on L for tiny negative x
    if y >= box_length {
        y -= box_length;
    }
    y
}
