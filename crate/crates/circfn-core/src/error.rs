//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building or analyzing normal forms.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate fell outside the base space or a required window.
    #[error("domain error: {0}")]
    Domain(String),

    /// The profile derivative vanishes identically on a segment, or a
    /// critical point is flat beyond the available derivative order.
    #[error("flat profile: {0}")]
    FlatProfile(String),

    /// A structural invariant of a profile, chain or normal form failed.
    #[error("validation error: {0}")]
    Validation(String),

    /// Requested windows do not fit between critical circles.
    #[error("window gap error: {0}")]
    Gap(String),

    /// The field coefficient vanishes somewhere on the band region.
    #[error("not an admissible circle field: {0}")]
    NotHField(String),

    /// An operation required a period-normalized field.
    #[error("field is not period-normalized: {0}")]
    NotNormalized(String),

    /// A precondition of an operation does not hold for the given input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Morsification could not place a replacement window.
    #[error("morsify error: {0}")]
    Morsify(String),

    /// Whitney factorization applied to a function that is not even.
    #[error("input function is not even: {0}")]
    NotEven(String),

    /// The sampling grid is too coarse to separate critical loci.
    #[error("ambiguous grid loci: {0}")]
    AmbiguousLoci(String),

    /// Equivalence witness construction failed after the decision said yes.
    #[error("witness construction failed: {0}")]
    Witness(String),
}

pub type Result<T> = std::result::Result<T, Error>;
