//! Error types shared across the toolkit.
//!
//! Three families keep failure modes distinct for callers (and let the CLI
//! map them to stable exit codes): [`ModelError`] for invalid parameters or
//! domain violations, [`DataError`] for climate-data ingestion and coverage
//! problems, and [`StructuringError`] for optimizations whose target is
//! unreachable within the stated bounds.

use thiserror::Error;

/// Invalid parameters or misuse of the domain model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A scalar or vector parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A scenario name does not exist in the ladder.
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    /// A scenario id does not belong to the ladder it was used with.
    #[error("scenario ladder mismatch: {0}")]
    LadderMismatch(String),

    /// An operation that needs at least one observation received none.
    #[error("empty input: {0}")]
    EmptyInput(String),
}

/// Climate projection data that cannot be ingested or does not cover a request.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Header row differs from the documented schema.
    #[error("bad header: expected `location,scenario,year,value`, found `{found}`")]
    BadHeader { found: String },

    /// A row that cannot be parsed; `line` is 1-based and counts the header.
    #[error("line {line}: {reason}")]
    BadRecord { line: u64, reason: String },

    /// The same (location, scenario, year) key appears twice.
    #[error("line {line}: duplicate key ({location}, {scenario}, {year})")]
    DuplicateKey {
        line: u64,
        location: String,
        scenario: String,
        year: i32,
    },

    /// A sampler or pipeline asked for keys the table does not contain.
    #[error("missing projection keys: {}", keys.join(", "))]
    MissingKeys { keys: Vec<String> },

    /// A well-formed file with no data rows.
    #[error("no data rows")]
    Empty,
}

/// An optimization target that cannot be met within its bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuringError {
    /// Price search bounds exclude the break-even floor.
    #[error("infeasible price bounds: {0}")]
    InfeasibleBounds(String),

    /// NPV target lies outside what any admissible coupon schedule can reach.
    #[error(
        "NPV target {target:.6} outside achievable range [{low:.6}, {high:.6}]"
    )]
    TargetOutOfRange { target: f64, low: f64, high: f64 },
}

/// Either failure mode of an optimizer entry point: bad inputs or an
/// unreachable target.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Structuring(#[from] StructuringError),
}

/// Any failure while pricing or structuring a climate-contingent bond:
/// bad terms, missing climate data, or an unreachable NPV target.
#[derive(Debug, Error)]
pub enum CcbError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Structuring(#[from] StructuringError),
}
