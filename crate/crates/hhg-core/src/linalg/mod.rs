//! Sparse/banded complex linear algebra used by the eigensolvers.
//!
//! Everything here is deterministic: no randomized starting vectors, no
//! thread-order-dependent reductions, so repeated solves are bit-identical.

pub mod arnoldi;
pub mod banded;
pub mod dense;

pub use arnoldi::{shift_invert_eigs, ArnoldiOptions, RitzPair};
pub use banded::{BandedLu, DiagMatrix};
pub use dense::dense_eigs;
