//! Config-driven experiment runner: `validate`, `run` and `bench` over the
//! built-in models.

pub mod bench;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Resolved, RunConfig};
pub use error::{CliError, Result};
