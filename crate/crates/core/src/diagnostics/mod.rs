//! Executable checks for convexity, descent directions, discreteness,
//! checkerboarding and local-minima comparisons.

mod compare;
mod descent;
mod measures;
mod probe;
mod threshold;

pub use compare::{compare_runs, relative_gap, ComparisonRow, ComparisonTable, PairGap};
pub use descent::{descent_direction_check, nonnegative_terms};
pub use measures::{checkerboard_index, discreteness_measure};
pub use probe::{
    convexity_probe, convexity_probe_pairs, ComplianceObjective, ProbeReport, Property, Violation,
    PROBE_TOLERANCE,
};
pub use threshold::threshold_project;
