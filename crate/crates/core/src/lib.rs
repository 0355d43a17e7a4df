//! Weighted exponential frames for self-affine measures.
//!
//! Given an integer scale `R`, a digit set `B`, a frequency digit set `L`,
//! and complex weights `alpha_l`, this crate validates the system, computes
//! the finite minimal invariant sets ("min-sets") of the transition maps
//! `g_l(t) = (t - l)/R` by exact rational arithmetic, enumerates cycle words
//! and the weighted exponential frame they generate, and numerically
//! certifies Parseval-type identities through truncated infinite products.
//!
//! Modules:
//! - [`algebra`]: exact rational scalars and root-of-unity zero tests
//! - [`system`]: the `(R, B, L, alpha)` input system and its validation
//! - [`dynamics`]: transition graphs, min-sets, cycle words, DOT export
//! - [`frames`]: frame element enumeration and weight aggregation
//! - [`measure`]: Fourier transform products and Parseval verification
//! - [`theory`]: structural results specialized to scale 4 and digits {0, 2}

pub mod algebra;
pub mod dynamics;
pub mod frames;
pub mod measure;
mod scc;
pub mod system;
pub mod theory;

pub use algebra::{Rational, Scalar};
pub use system::{FrameSystem, ValidationReport};

use algebra::Rational as Rat;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("system failed validation: {0}")]
    Validation(String),
    #[error("digit {digit} is not in the frequency digit set")]
    DigitNotInFrequencySet { digit: i64 },
    #[error("point {point} does not belong to any min-set")]
    NotAMinSetPoint { point: Rat },
    #[error("point {point} is not in the given min-set")]
    NotInMinSet { point: Rat },
    #[error("point {point} is not a min-set representative")]
    NotARepresentative { point: Rat },
    #[error("points must be distinct (got {point} twice)")]
    SamePoint { point: Rat },
    #[error("operation requires scale 4 with digit set {{0, 2}}")]
    WrongSpecialization,
    #[error("digits {a} and {b} are not congruent modulo 4")]
    ResidueMismatch { a: i64, b: i64 },
    #[error("no possible transition within the sub-digit set from {point}")]
    DecompositionStall { point: Rat },
    #[error("solver disagreement: {0}")]
    SolverDisagreement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
