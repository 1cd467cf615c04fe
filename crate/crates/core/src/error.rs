use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("phase space must contain at least one cell")]
    EmptyPhaseSpace,

    #[error("cell {cell} is out of range for a phase space of {cell_count} cells")]
    CellOutOfRange { cell: usize, cell_count: usize },

    #[error("incompatible spaces: {left} cells vs {right} cells")]
    IncompatibleSpaces { left: usize, right: usize },

    #[error("map is not a bijection: {0}")]
    NotBijective(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown macrostate label `{0}`")]
    UnknownLabel(String),

    #[error("invalid times: {0}")]
    InvalidTimes(String),

    #[error("inconsistent boundary conditions: no microstate satisfies both boundaries")]
    InconsistentBoundaryConditions,

    #[error("undefined density: {0} has zero measure")]
    UndefinedDensity(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("observation impossible under hypotheses")]
    ObservationImpossible,

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },

    #[error(
        "enumeration guard exceeded: {cell_count} cells > {limit}; use the region formula instead"
    )]
    EnumerationGuard { cell_count: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
