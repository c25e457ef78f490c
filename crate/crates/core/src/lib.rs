//! Exact computation of minimal projective resolutions over quotients of
//! path algebras.
//!
//! The crate builds finite-dimensional (or degreewise-truncated graded)
//! quotients `A = kQ/I` of path algebras, represents finitely generated
//! modules as quiver representations with exact scalar arithmetic, and
//! computes minimal projective resolutions, Betti tables, delta-profile
//! (Koszul-type) certificates, and minimal Horseshoe diagrams for short
//! exact sequences.
//!
//! Everything is exact: scalars are arbitrary-precision rationals or
//! elements of a prime field, and every homological predicate returns a
//! three-valued [`Verdict`] rather than a bare boolean, so truncated
//! computations can never silently overclaim.

pub mod algebra;
pub mod error;
pub mod horseshoe;
pub mod koszul;
pub mod lab;
pub mod linalg;
pub mod module;
pub mod quiver;
pub mod resolution;
pub mod verdict;

pub use algebra::{AlgebraMode, AlgebraSpec, AlgebraTable, Relation};
pub use error::{Error, Result};
pub use horseshoe::{HorseshoeDiagram, ShortExactSequence};
pub use koszul::{DeltaProfile, KoszulCertificate};
pub use lab::{AuditReport, AuditSuite, GenParams, ReplayOutcome};
pub use linalg::{Field, Mat, Scalar, Subspace};
pub use module::{Module, Morphism, ProjectiveShape};
pub use quiver::{Path, Quiver};
pub use resolution::{ProjectiveDimension, Resolution};
pub use verdict::Verdict;
