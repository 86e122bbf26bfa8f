use thiserror::Error;

use crate::certificate::ConditionReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Where a depth-first certificate search ran out of admissible choices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionReport {
    /// Deepest slot position (0-based, column order) that had no admissible candidate.
    pub deepest_slot: usize,
    /// Parameter index `j` of that slot.
    pub deepest_index: u32,
    /// `|det|` of the leading minor for each candidate tried at that slot.
    pub candidate_dets: Vec<f64>,
    /// Nondegeneracy threshold the candidates were measured against.
    pub threshold: f64,
    pub nodes_visited: usize,
    /// True when the node budget ran out before the tree was exhausted.
    pub budget_hit: bool,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("numerator and denominator share a root (resultant vanishes)")]
    ResultantZero,
    #[error("invalid rational map: {0}")]
    InvalidMap(String),
    #[error("degree must be at least {min}, got {got}")]
    InvalidDegree { min: u32, got: u32 },
    #[error("Moebius matrix is singular")]
    SingularMobius,
    #[error("orbit does not close up: chordal residual {residual:e}")]
    NotACycle { residual: f64 },
    #[error("fixed point with multiplier {re} + {im}i is too close to 1")]
    MultiplierOne { re: f64, im: f64 },
    #[error("fixed points are not simple")]
    DegenerateFixedPoints,
    #[error("n^m - 1 exceeds the exact integer range (n = {n}, m = {m})")]
    Overflow { n: u32, m: u32 },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("derivative of f^m(z) - z is singular (multiplier close to 1)")]
    DerivativeSingular,
    #[error("parameter index {j} is excluded for degree {n}")]
    IndexExcluded { n: u32, j: u32 },
    #[error("parameter index {j} is out of range for degree {n}")]
    IndexOutOfRange { n: u32, j: u32 },
    #[error("point at infinity is not allowed here")]
    InfinityPoint,
    #[error("invalid periodic point: {0}")]
    InvalidPoint(String),
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(
        "period conditions not met: (i) {} with {} periods equal to 1, (ii) {} with maximum {} and {} periods equal to 2",
        if .0.cond_i { "holds" } else { "fails" }, .0.ones_count,
        if .0.cond_ii { "holds" } else { "fails" }, .0.max_period, .0.twos_count
    )]
    ConditionsNotMet(ConditionReport),
    #[error("no admissible periodic vector found (deepest slot {}, {} nodes)", .0.deepest_slot, .0.nodes_visited)]
    Exhausted(Box<ExhaustionReport>),
    #[error("certificate verification failed: {0}")]
    VerificationFailed(String),
    #[error("cofactor polynomial degree bound fails at slot {slot}")]
    DegreeBound { slot: usize },
}

impl Error {
    /// Stable identifier used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ResultantZero => "ResultantZero",
            Error::InvalidMap(_) => "InvalidMap",
            Error::InvalidDegree { .. } => "InvalidDegree",
            Error::SingularMobius => "SingularMobius",
            Error::NotACycle { .. } => "NotACycle",
            Error::MultiplierOne { .. } => "MultiplierOne",
            Error::DegenerateFixedPoints => "DegenerateFixedPoints",
            Error::Overflow { .. } => "Overflow",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DerivativeSingular => "DerivativeSingular",
            Error::IndexExcluded { .. } => "IndexExcluded",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InfinityPoint => "InfinityPoint",
            Error::InvalidPoint(_) => "InvalidPoint",
            Error::InvalidStep(_) => "InvalidStep",
            Error::WrongLength { .. } => "WrongLength",
            Error::ConditionsNotMet(_) => "ConditionsNotMet",
            Error::Exhausted(_) => "Exhausted",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::DegreeBound { .. } => "DegreeBound",
        }
    }
}
