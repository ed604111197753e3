use alloc::string::String;
use core::fmt;

/// Crate-wide error type. Variant names follow the failure modes of the
/// operations that raise them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// `p` is not prime.
    NonPrime(u32),
    /// Field outside the supported range (`p <= 101`, `l <= 3`).
    UnsupportedField(String),
    /// Point dimension does not match the ambient dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Polynomial text did not parse; byte offset of the failure.
    SyntaxError { pos: usize, msg: String },
    /// Variable index out of range for the declared dimension.
    UnknownVariable { index: usize, n: usize },
    /// A rank/decomposition search exceeded its candidate budget.
    InfeasibleSearch { tested: u64, budget: u64 },
    /// Operation requires odd characteristic.
    CharTwo,
    /// Polynomial is not a (homogeneous) quadratic where one is required.
    NotQuadratic,
    /// No two sampled trials agreed; all observed counts are reported.
    DegenerateSampling(alloc::vec::Vec<u64>),
    /// An enumeration would exceed the configured budget.
    BudgetExceeded { needed: u64, budget: u64 },
    /// A cube vertex falls outside a table's domain (point index).
    VertexOutsideDomain(u64),
    /// A declared fiber of a finite map is empty.
    EmptyFiber(usize),
    /// Exhaustive bucketing budget exceeded.
    BudgetExceededFibers,
    /// A basepoint handed to a shifted-zero count is not on the variety.
    BasepointNotOnVariety(usize),
    /// Solver precondition violated (message says which).
    PreconditionViolated(String),
    /// A solver exhausted its search space without finding a witness.
    NoSolutionFound,
    /// The square handed to an opposite-face solver is degenerate.
    DegenerateSquare,
    /// Restricted rank too low for a guaranteed construction.
    RankTooLow,
    /// Majority vote failed at a point (point index).
    NoMajority(u64),
    /// No valid completion cubes could be generated for a point.
    EmptyZ(u64),
    /// Two representations of the same difference-set point disagree.
    InconsistentRepresentations { v: u64, first: (u64, u64), second: (u64, u64) },
    /// A linear-algebra fit failed or verified false (stage tag).
    InconsistentFit(String),
    /// No basepoint `x0` in `X \ W` exists.
    NoX0Found,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPrime(p) => write!(f, "{p} is not prime"),
            Error::UnsupportedField(m) => write!(f, "unsupported field: {m}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SyntaxError { pos, msg } => write!(f, "syntax error at byte {pos}: {msg}"),
            Error::UnknownVariable { index, n } => {
                write!(f, "unknown variable x{index} (dimension {n})")
            }
            Error::InfeasibleSearch { tested, budget } => {
                write!(f, "search infeasible: {tested} candidates exceeds budget {budget}")
            }
            Error::CharTwo => write!(f, "characteristic 2 not supported here"),
            Error::NotQuadratic => write!(f, "polynomial is not a homogeneous quadratic"),
            Error::DegenerateSampling(counts) => {
                write!(f, "no two trials agree; counts {counts:?}")
            }
            Error::BudgetExceeded { needed, budget } => {
                write!(f, "budget exceeded: needs {needed}, budget {budget}")
            }
            Error::VertexOutsideDomain(v) => write!(f, "cube vertex {v} outside table domain"),
            Error::EmptyFiber(y) => write!(f, "empty fiber over target {y}"),
            Error::BudgetExceededFibers => write!(f, "fiber bucketing budget exceeded"),
            Error::BasepointNotOnVariety(j) => write!(f, "basepoint {j} not on the variety"),
            Error::PreconditionViolated(m) => write!(f, "precondition violated: {m}"),
            Error::NoSolutionFound => write!(f, "no solution found"),
            Error::DegenerateSquare => write!(f, "degenerate square"),
            Error::RankTooLow => write!(f, "restricted rank too low"),
            Error::NoMajority(x) => write!(f, "no strict majority at point {x}"),
            Error::EmptyZ(v) => write!(f, "no completion cubes at point {v}"),
            Error::InconsistentRepresentations { v, first, second } => write!(
                f,
                "inconsistent representations of {v}: {first:?} vs {second:?}"
            ),
            Error::InconsistentFit(stage) => write!(f, "inconsistent fit at stage {stage}"),
            Error::NoX0Found => write!(f, "no basepoint x0 in X outside the hyperplane"),
        }
    }
}

impl core::error::Error for Error {}
