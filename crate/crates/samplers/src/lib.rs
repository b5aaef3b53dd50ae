//! Samplers built on random batches: random batch Monte Carlo for Gibbs
//! measures with singular pair interactions, and RBM-SVGD.

pub mod error;
pub mod gibbs;
pub mod output;
pub mod rbmc;
pub mod svgd;

pub use error::{Error, Result};
pub use gibbs::{log_split, GibbsTarget, ShortRangePair, SmoothPair};
pub use output::SampleWriter;
pub use rbmc::{rbmc_accept, rbmc_propose, rbmc_step, MarkovChainStats, Proposal, RbmcChain, RbmcConfig};
pub use svgd::{
    rbm_svgd_step, rbm_svgd_velocities, svgd_velocities, svgd_velocity, GaussianKernel, Svgd, SvgdSchedule,
    SvgdState,
};
