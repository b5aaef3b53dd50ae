use thiserror::Error;

/// Errors raised by the particle machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("batch size must be ≥ 2, got {0}")]
    BatchTooSmall(usize),
    #[error("batch size {p} exceeds particle count {n}")]
    BatchTooLarge { p: usize, n: usize },
    #[error("particle {0} is not a member of the batch")]
    NotInBatch(usize),
    #[error("cutoff {cutoff} must be below half the box length ({half})")]
    CutoffTooLarge { cutoff: f64, half: f64 },
    #[error("operation requires a periodic box")]
    NotPeriodic,
    #[error("operation requires velocities")]
    MissingVelocities,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite state after step at t={time}: particle {particle}, coordinate {coordinate}")]
    NonFinite {
        time: f64,
        particle: usize,
        coordinate: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
