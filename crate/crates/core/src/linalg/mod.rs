//! Exact dense linear algebra over the rationals and prime fields.
//!
//! Every other part of the engine reduces its questions (kernels,
//! containments, intersections, solvability) to the primitives here.
//! Vectors are rows and a linear map is a matrix acting by right
//! multiplication, so composition reads left to right.

mod mat;
mod scalar;
mod subspace;

pub use mat::{rref, rref_tracked, solve, Mat, Rref};
pub use scalar::{Field, Scalar, DEFAULT_PRIME};
pub use subspace::{kernel_basis, Subspace};
