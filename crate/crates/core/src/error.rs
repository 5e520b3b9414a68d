use alloc::string::String;

/// Errors raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid particle set: {0}")]
    InvalidParticles(String),
    #[error("basis dimension {size} exceeds cap {cap}")]
    DimensionCapExceeded { size: String, cap: usize },
    #[error("lattice label {label} outside [-{half}, {half}]")]
    LabelOutOfRange { label: i64, half: i64 },
    #[error("coincident particles {i} and {j} with zero Coulomb softening")]
    SingularCoulomb { i: usize, j: usize },
    #[error("trap center of nucleus {nucleus} lies outside the box")]
    CenterOutsideBox { nucleus: usize },
    #[error("invalid trap: {0}")]
    InvalidTrap(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("schedule parameter {s} outside [0, {s1}]")]
    ScheduleOutOfRange { s: f64, s1: f64 },
    #[error("trajectory distance must be strictly positive, got {0}")]
    NonpositiveDistance(f64),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("input state is not normalized (norm {0})")]
    UnnormalizedInput(f64),
    #[error("time grid is not uniform")]
    NonuniformGrid,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid symmetry declaration: {0}")]
    InvalidDeclaration(String),
    #[error("(anti)symmetrization annihilates the input")]
    VanishingNorm,
    #[error("criterion pair index {index} out of range for {n_nuc} nuclei")]
    PairIndexOutOfRange { index: usize, n_nuc: usize },
    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),
    #[error("measurement branch has zero probability")]
    ZeroProbabilityBranch,
    #[error("coefficients are degenerate (delta = pi/2 with p_suc = 1)")]
    Degenerate,
    #[error("measurement angle {0} outside [0, pi/2]")]
    InvalidDelta(f64),
    #[error("no success after {0} iterations")]
    MaxItersExceeded(usize),
    #[error("channel is not trace preserving (trace {0})")]
    ChannelNotTracePreserving(f64),
    #[error("spin is not enabled on register {0}")]
    SpinNotEnabled(usize),
    #[error("invalid spin target: {0}")]
    InvalidSpinTarget(String),
    #[error("spin sector has probability {0:e}")]
    EmptySector(f64),
    #[error("node {node_id} exhausted its retry budget")]
    NodeExhausted { node_id: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("unsupported unit conversion: {0}")]
    UnsupportedUnit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
