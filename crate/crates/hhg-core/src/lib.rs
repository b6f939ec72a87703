//! High-harmonic generation from a strong-cw-driven 1D model atom, computed
//! with non-Hermitian (complex-scaled) Floquet theory.
//!
//! The crate builds the extended Floquet operator of a soft-core atom driven
//! by a monochromatic field on a uniform-exterior-complex-rotated spatial
//! grid, solves for the metastable dressed states nearest a chosen field-free
//! seed with a shift-invert Arnoldi iteration, and turns the converged
//! eigenvectors into emission spectra:
//!
//! * [`atom`], [`grid`] — the model atom, the scaled grid, and the field-free
//!   bound states used to seed and identify resonances.
//! * [`floquet`] — extended-operator assembly, resonance solves, symmetry
//!   classification, and stability scans over the rotation angle.
//! * [`spectrum`] — harmonic amplitudes from channel-pair dipole matrix
//!   elements, plateau/cutoff inspection helpers.
//! * [`cavity`], [`chain`] — polariton pairs of a single-mode cavity coupled
//!   to the dressed ground/excited states, hybrid spectra with symmetry-broken
//!   side harmonics, multi-cavity composition, and coupling-strength sweeps.
//! * [`pulse`] — attosecond pulse trains synthesized from spectral windows,
//!   peak-spacing and periodicity measurements.
//! * [`tdse`] — an independent split-operator time-propagation reference that
//!   produces spectra from the time-dependent dipole acceleration.
//! * [`cache`] — content-addressed on-disk reuse of converged eigenstates.
//!
//! All quantities are in Hartree atomic units unless a field says otherwise.

pub mod atom;
pub mod cache;
pub mod cavity;
pub mod chain;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod pulse;
pub mod spectrum;
pub mod tdse;

pub use error::{Error, Result};

/// Complex double — the scalar type of every operator and state in the crate.
pub type C64 = num_complex::Complex64;

/// Crate version embedded in output files so artifacts can be traced to a build.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
