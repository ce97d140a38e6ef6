//! Error taxonomy shared by every module.
//!
//! Each variant names one way a construction or a certificate can fail.
//! Verification failures are *not* errors: the verifier returns a
//! [`crate::verify::Report`] whose entries describe what failed and where.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Subdivision lengths do not sum to the length of the split edge.
    #[error("subdivision lengths for edge {edge} sum to {got}, edge has length {expected}")]
    LengthMismatch {
        edge: usize,
        got: String,
        expected: String,
    },

    /// Reverse subdivision applied at a vertex that is not a plain
    /// degree-2 through-vertex.
    #[error("vertex {vertex} is not removable: {reason}")]
    NotRemovable { vertex: usize, reason: String },

    /// An operation that requires a finite vertex was applied at an
    /// infinite one.
    #[error("vertex {vertex} is infinite")]
    InfiniteVertex { vertex: usize },

    /// Two coincident points where a segment was expected.
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    /// A matrix with |det| != 1 passed where a lattice-preserving map is
    /// required.
    #[error("matrix [[{a},{b}],[{c},{d}]] has determinant {det}, not ±1")]
    NotUnimodular {
        a: i64,
        b: i64,
        c: i64,
        d: i64,
        det: i64,
    },

    /// Vertex id not present in the complex or graph.
    #[error("unknown vertex {vertex}")]
    UnknownVertex { vertex: usize },

    /// Two elements of a complex overlap in a segment of positive length,
    /// or touch tangentially; crossing counts are undefined there.
    #[error("elements {first} and {second} overlap or touch degenerately")]
    Overlap { first: String, second: String },

    /// The exact crossing solver ran out of its search budget.
    #[error("crossing solver exceeded its budget of {budget} planarity tests (best upper bound: {upper_bound})")]
    BudgetExceeded { budget: u64, upper_bound: u32 },

    /// Internal invariant violation: a graph expected to be planar is not.
    #[error("graph is not planar ({context})")]
    NotPlanar { context: String },

    /// Disjoint rerouting neighborhoods around crossings could not be
    /// found at the requested radius.
    #[error("crossing neighborhoods of radius {radius} collide")]
    NeighborhoodConflict { radius: String },

    /// No rational perturbation preserves the crossing combinatorics.
    #[error("vertex perturbation failed: {reason}")]
    PerturbationFailed { reason: String },

    /// A staircase was asked to shrink a length or hit a malformed spec.
    #[error("invalid elongation target: {reason}")]
    InvalidTarget { reason: String },

    /// A scalar or point falls outside the declared value group.
    #[error("value outside the declared value group: {what}")]
    NotInLambda { what: String },

    /// A length that must be strictly positive is zero or negative.
    #[error("length must be strictly positive, got {got}")]
    NonPositiveLength { got: String },

    /// Membership query for a point that does not lie on the segment.
    #[error("point does not lie on the segment")]
    NotOnSegment,

    /// Malformed input text.
    #[error("parse error: {message}")]
    Parse { message: String },

    /// Well-formed input that violates a structural rule.
    #[error("schema error: {message}")]
    Schema { message: String },

    /// Sign of a value-group element could not be certified at the
    /// precision of the declared generator enclosures.
    #[error("sign of {value} is undecidable at the declared enclosure precision")]
    UndecidableSign { value: String },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable category tag, used by reports and the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::NotRemovable { .. } => "not-removable",
            Error::InfiniteVertex { .. } => "infinite-vertex",
            Error::DegenerateSegment => "degenerate-segment",
            Error::NotUnimodular { .. } => "not-unimodular",
            Error::UnknownVertex { .. } => "unknown-vertex",
            Error::Overlap { .. } => "overlap",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::NotPlanar { .. } => "not-planar",
            Error::NeighborhoodConflict { .. } => "neighborhood-conflict",
            Error::PerturbationFailed { .. } => "perturbation-failed",
            Error::InvalidTarget { .. } => "invalid-target",
            Error::NotInLambda { .. } => "not-in-lambda",
            Error::NonPositiveLength { .. } => "non-positive-length",
            Error::NotOnSegment => "not-on-segment",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::UndecidableSign { .. } => "undecidable-sign",
        }
    }
}
