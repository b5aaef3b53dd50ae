//! Metrics comparing simulations with oracles and analytic references.

mod bench;
mod histogram;
mod radial;
mod strong_error;
mod wasserstein;

pub use bench::{scaling_benchmark, ScalingPoint};
pub use histogram::Histogram;
pub use radial::{fit_log_profile, radial_net_charge, LineFit, RadialProfile};
pub use strong_error::{strong_error, StrongError};
pub use wasserstein::{wasserstein1_1d, wasserstein1_to_cdf, EmpiricalMeasure};
