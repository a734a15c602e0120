//! Error type shared by all library operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlatError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("ray starts at a vertex; an outgoing corner sector is required")]
    AmbiguousStart,

    #[error("incoherent curve word: {0}")]
    IncoherentWord(String),

    #[error("curve word is contractible")]
    ContractibleCurve,

    #[error("curve is not simple (self-intersection number {0})")]
    NotSimple(u64),

    #[error("curves are disjoint (intersection number 0)")]
    DisjointCurves,

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("marked pair combinatorics mismatch: {0}")]
    MarkingMismatch(String),

    #[error("no candidate curves below the length bound")]
    EmptyCandidates,

    #[error("work budget exceeded ({0} units)")]
    CapTooLarge(u64),

    #[error("unknown corpus entry: {0}")]
    UnknownCorpusEntry(String),

    #[error("corpus constraint failure: {0}")]
    ConstraintFailure(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, FlatError>;
