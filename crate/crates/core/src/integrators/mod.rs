//! Stochastic and deterministic time steppers for the conditioned state,
//! plus noise paths and the trajectory driver.

mod ops;
mod pure;
mod step;
mod trajectory;
mod wiener;

pub use ops::{HamiltonianPart, SparseChannel, StepOps};
pub use pure::{PureEnsemble, COMPONENT_CUTOFF};
pub use step::{
    advance_record, euler_maruyama_step, lindblad_step, measurement_traces, milstein_step,
    recover_increments, rouchon_step, Stepper,
};
pub use trajectory::{
    run_master_equation, run_trajectory, run_trajectory_with, KSchedule, ObservableSet,
    Representation, RunOptions, Sample, Scheme, TrajectoryRecord, PURITY_VIOLATION_TOL,
    TRUNCATION_THRESHOLD,
};
pub use wiener::{sample_wiener, sample_wiener_stream, WienerGrid};
