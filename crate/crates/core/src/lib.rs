//! Density-based topology optimization for 2D linear-elastic compliance problems.
//!
//! The crate covers the full nested loop: a structured Q4 plane-stress model
//! ([`mesh`], [`fem`]), modified SIMP interpolation ([`material`]), neighborhood
//! filters and projections ([`filters`]), Optimality Criteria updates with
//! continuation on the penalization exponent and the Heaviside sharpness
//! ([`optimizer`]), and numerical probes of convexity, descent and discreteness
//! ([`diagnostics`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod filters;
pub mod material;
pub mod mesh;
pub mod optimizer;
mod solver;

pub use error::{Error, Result};
pub use fem::{
    assemble_and_solve, compliance, compliance_sensitivities, element_stiffness, ElasticState,
    FeModel,
};
pub use filters::{FilterKind, FilterPipeline, FilterSpec, Mean, Weighting};
pub use material::{interpolate_modulus, modulus_derivative, DesignField, MaterialLaw};
pub use mesh::{build_mesh, BcPreset, MeshModel};
pub use optimizer::{run_optimization, ContinuationSchedule, InitialGuess, OcSettings, RunRecord};
