use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("unknown cell `{0}`")]
    UnknownCell(String),

    #[error("infinite boundary: tail on end {end} is not closed")]
    InfiniteBoundary { end: usize },

    #[error("undefined pairing: {0}")]
    UndefinedPairing(String),

    #[error("finiteness certificate failed: {0}")]
    Certificate(String),

    #[error("not a cycle: {0}")]
    NotCycle(String),

    #[error("homology did not stabilize up to depth {max_depth}: {detail}")]
    Unstable { max_depth: usize, detail: String },

    #[error("no eventually periodic witness exists on end {end}")]
    NonPeriodicWitness { end: usize },

    #[error("basis of {states} states exceeds the cap of {cap}")]
    CapExceeded { states: u128, cap: u128 },

    #[error("value depends on the logical state: {0}")]
    LogicalStateDependent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Argument(_) => "argument",
            Error::InvalidComplex(_) => "invalid_complex",
            Error::UnknownCell(_) => "unknown_cell",
            Error::InfiniteBoundary { .. } => "infinite_boundary",
            Error::UndefinedPairing(_) => "undefined_pairing",
            Error::Certificate(_) => "certificate",
            Error::NotCycle(_) => "not_cycle",
            Error::Unstable { .. } => "unstable",
            Error::NonPeriodicWitness { .. } => "non_periodic_witness",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::LogicalStateDependent(_) => "logical_state_dependent",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
