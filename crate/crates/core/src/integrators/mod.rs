//! Time steppers: the full-batch reference, the random batch method for
//! first- and second-order systems, RBM with replacement, RBM with kernel
//! splitting, and thermostats.

mod schedule;
mod stepper;
mod system;
mod thermostat;

pub use schedule::StepSchedule;
pub use stepper::{
    direct_step, interaction_forces, rbm_split_step, rbm_step_first_order, rbm_step_second_order, rbmr_step,
    step, Method, StepReport,
};
pub use system::{FirstOrderSystem, NoiseMode, SecondOrderSystem, System};
pub use thermostat::{apply_andersen, nose_hoover_step, Thermostat};
