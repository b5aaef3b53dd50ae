//! Charged particles in a periodic cubic box.

use rbm_core::ParticleState;

use crate::error::{Error, Result};

/// Largest admissible `|Σ q_i|`.
pub const NEUTRALITY_TOLERANCE: f64 = 1e-12;

/// Point charges in a periodic cube of side `L`.
#[derive(Debug, Clone)]
pub struct PeriodicChargeSystem {
    pub state: ParticleState,
    charges: Vec<f64>,
}

impl PeriodicChargeSystem {
    pub fn new(state: ParticleState, charges: Vec<f64>) -> Result<Self> {
        if state.dim() != 3 || state.box_length().is_none() {
            return Err(Error::NotThreeDimensional);
        }
        if charges.len() != state.len() {
            return Err(rbm_core::Error::Shape(format!(
                "{} charges for {} particles",
                charges.len(),
                state.len()
            ))
            .into());
        }
        let net: f64 = charges.iter().sum();
        if net.abs() > NEUTRALITY_TOLERANCE || !net.is_finite() {
            return Err(Error::NotNeutral(net));
        }
        Ok(Self { state, charges })
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn box_length(&self) -> f64 {
        self.state.box_length().expect("checked at construction")
    }

    pub fn volume(&self) -> f64 {
        self.box_length().powi(3)
    }

    /// Number density `N/L³`.
    pub fn density(&self) -> f64 {
        self.len() as f64 / self.volume()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        self.state.position(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(xs: Vec<f64>) -> ParticleState {
        ParticleState::new(3, xs).unwrap().periodic(5.0).unwrap()
    }

    #[test]
    fn rejects_net_charge() {
        let err = PeriodicChargeSystem::new(state(vec![0.0; 6]), vec![1.0, -0.5]).unwrap_err();
        assert!(matches!(err, Error::NotNeutral(q) if q == 0.5));
        assert!(err.to_string().contains("electroneutral"));
    }

    #[test]
    fn accepts_rounding_level_imbalance() {
        let q = vec![0.1, 0.2, -0.3];
        assert!(PeriodicChargeSystem::new(state(vec![0.0; 9]), q).is_ok());
    }

    #[test]
    fn rejects_open_or_planar_boxes() {
        let open = ParticleState::new(3, vec![0.0; 6]).unwrap();
        assert!(matches!(
            PeriodicChargeSystem::new(open, vec![1.0, -1.0]),
            Err(Error::NotThreeDimensional)
        ));
        let planar = ParticleState::new(2, vec![0.0; 4]).unwrap().periodic(1.0).unwrap();
        assert!(PeriodicChargeSystem::new(planar, vec![1.0, -1.0]).is_err());
    }
}
