//! Optimality Criteria updates, continuation schedules and the nested
//! analyze-filter-update loop.

mod continuation;
mod initial;
mod oc;
mod run;

pub use continuation::{
    continuation_advance, default_beta_ramp, Advance, ContinuationSchedule, Stage, StageState,
};
pub use initial::{initial_design, random_feasible, InitialGuess, RANDOM_VOLUME_TOL};
pub use oc::{oc_candidate, oc_update, oc_update_with, OcSettings, OcStep};
pub use run::{run_optimization, IterationRecord, RunRecord, StageSummary};
