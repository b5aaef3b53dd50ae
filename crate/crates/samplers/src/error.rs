use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] rbm_core::Error),
    #[error("{0}")]
    InvalidParameter(String),
    #[error(
        "particles diverged at step {step} (max |x| = {max:e}); reduce the step size or use a decaying schedule"
    )]
    Diverged { step: u64, max: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
