use thiserror::Error;

/// Errors produced by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh dimensions: nx={nx}, ny={ny}, h={h}")]
    InvalidDimensions { nx: usize, ny: usize, h: f64 },

    #[error("unknown boundary-condition preset `{0}` (expected mbb_half, cantilever or custom)")]
    UnknownPreset(String),

    #[error("dof {dof} out of range (mesh has {ndof} dofs)")]
    DofOutOfRange { dof: usize, ndof: usize },

    #[error("poisson ratio {0} outside (-1, 0.5)")]
    PoissonOutOfRange(f64),

    #[error("invalid material law: {0}")]
    InvalidMaterial(String),

    #[error("invalid design field: {0}")]
    InvalidDesign(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stiffness matrix is singular at equation {equation} (insufficient supports?)")]
    SingularSystem { equation: usize },

    #[error("linear solve did not reach tolerance: residual {residual:e} > {tolerance:e}")]
    SolverNonConvergence { residual: f64, tolerance: f64 },

    #[error("invalid filter specification: {0}")]
    InvalidFilter(String),

    #[error("positive compliance sensitivity {value:e} at element {element}")]
    PositiveGradient { element: usize, value: f64 },

    #[error("volume bisection could not bracket the multiplier after {0} expansions")]
    BracketFailure(usize),

    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),

    #[error("invalid continuation schedule: {0}")]
    InvalidSchedule(String),

    #[error("descent check failed at stage {stage}, iteration {iteration}: dot product {dot:e} (non-negative-term count {nonneg_terms} of {terms})")]
    DescentViolation {
        stage: usize,
        iteration: usize,
        dot: f64,
        nonneg_terms: usize,
        terms: usize,
    },

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("mesh too small for this operation: {0}")]
    MeshTooSmall(String),

    #[error("incompatible run records: {0}")]
    IncompatibleRecords(String),
}

pub type Result<T> = std::result::Result<T, Error>;
