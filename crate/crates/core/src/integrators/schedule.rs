use crate::error::{Error, Result};

/// Step sizes `Δt_k` for steps `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `Δt_k = c / ln(k + 1)`.
    LogDecay(f64),
    /// `Δt_k = 1 / (k + k0)`.
    Inverse(f64),
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(dt) => dt > 0.0 && dt.is_finite(),
            StepSchedule::LogDecay(c) => c > 0.0 && c.is_finite(),
            StepSchedule::Inverse(k0) => k0 > -1.0 && k0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid step schedule {self:?}")))
        }
    }

    /// Step size of the `k`-th step (`k ≥ 1`).
    pub fn step(&self, k: usize) -> f64 {
        let k = k.max(1) as f64;
        match *self {
            StepSchedule::Constant(dt) => dt,
            StepSchedule::LogDecay(c) => c / (k + 1.0).ln(),
            StepSchedule::Inverse(k0) => 1.0 / (k + k0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decaying_schedules_are_positive_and_nonincreasing() {
        for s in [StepSchedule::LogDecay(1e-3), StepSchedule::Inverse(10.0), StepSchedule::Constant(0.1)] {
            s.validate().unwrap();
            let mut prev = f64::INFINITY;
            for k in 1..10_000 {
                let h = s.step(k);
                assert!(h > 0.0 && h <= prev);
                prev = h;
            }
        }
    }

    #[test]
    fn log_decay_values() {
        let s = StepSchedule::LogDecay(0.001);
        assert!((s.step(1) - 0.001 / 2f64.ln()).abs() < 1e-18);
        assert_eq!(StepSchedule::Inverse(1.0).step(3), 0.25);
    }

    #[test]
    fn rejects_nonpositive_steps() {
        assert!(StepSchedule::Constant(0.0).validate().is_err());
        assert!(StepSchedule::LogDecay(-1.0).validate().is_err());
    }
}
