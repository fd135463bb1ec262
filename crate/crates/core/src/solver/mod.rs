//! Backward-Euler time integration of the coupled system.

mod config;
mod newton;
mod run;
mod step;

pub use config::{OuterCoupling, SolverConfig};
pub use newton::{newton_solve, NewtonEval, NewtonOptions, NewtonResult};
pub use run::{run_simulation, Snapshot, Trajectory};
pub use step::{advance_step, physical_state, StepContext, StepOutcome, StepStats};
