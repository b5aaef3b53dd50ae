//! Random batch methods for interacting particle systems.
//!
//! The crate provides particle states, interaction kernels, random batch
//! divisions and the force estimators built on them, time integrators with
//! thermostats, a set of reference models and diagnostics.

pub mod batch;
pub mod cell_list;
pub mod diagnostics;
pub mod error;
pub mod forces;
pub mod integrators;
pub mod kernel;
pub mod models;
pub mod rng;
pub mod state;

pub use batch::{random_division, sample_batch_with_replacement, BatchDivision};
pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use rng::{RngStream, StepRngs};
pub use state::ParticleState;
