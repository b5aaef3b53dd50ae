use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] rbm_core::Error),
    #[error("system is not electroneutral: net charge {0:e}")]
    NotNeutral(f64),
    #[error("Ewald sums need a periodic three-dimensional box")]
    NotThreeDimensional,
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
