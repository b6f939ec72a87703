//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough context
//! (offending values, best candidates, required resolutions) for a caller to
//! report the failure without re-deriving it.

use crate::C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more configuration fields are out of range. All violations are
    /// collected before reporting so a bad file is fixed in one pass.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),

    /// Grid/absorber geometry cannot support the requested propagation.
    #[error("grid unsuitable: {0}")]
    GridUnsuitable(String),

    /// The iterative eigensolver ran out of restarts before reaching the
    /// residual tolerance.
    #[error(
        "eigensolver did not converge: {converged} of {requested} pairs below \
         residual {tol:.1e} after {restarts} restarts (best residual {best_residual:.3e})"
    )]
    EigenNotConverged {
        requested: usize,
        converged: usize,
        restarts: usize,
        tol: f64,
        best_residual: f64,
    },

    /// The factorized shift was numerically singular or the back-substitution
    /// lost too much accuracy.
    #[error("linear solve at shift {shift} failed: {reason}")]
    LinearSolve { shift: C64, reason: String },

    /// No converged eigenvector overlapped the seed above the floor.
    /// `candidates` holds `(quasienergy, |overlap|)` sorted by overlap.
    #[error(
        "state identification failed: best |overlap| {best:.4} is below floor {floor}; \
         candidates: {}",
        format_candidates(.candidates)
    )]
    StateIdentification {
        floor: f64,
        best: f64,
        candidates: Vec<(C64, f64)>,
    },

    /// Neither dynamical-symmetry assignment fits the state.
    #[error(
        "symmetry-broken state: S=+ residual {plus:.3e}, S=− residual {minus:.3e}, \
         both above 0.1 (unconverged or mixed state)"
    )]
    SymmetryBroken { plus: f64, minus: f64 },

    /// A harmonic order beyond what the channel truncation can represent.
    #[error(
        "harmonic order {order} exceeds the channel span {span} of the state; \
         raise the channel cutoff"
    )]
    OrderBeyondTruncation { order: i64, span: i64 },

    /// The polariton pair is degenerate (zero Rabi splitting and detuning),
    /// so branch weights are undefined.
    #[error("degenerate polariton pair: detuning and coupling both vanish at this point")]
    DegeneratePair,

    /// A spectrum passed to cavity composition is missing a required order.
    #[error("input spectrum has no entry at harmonic order {order}")]
    MissingOrder { order: f64 },

    /// A chain must contain at least one cavity.
    #[error("cavity chain is empty")]
    EmptyChain,

    /// Pulse synthesis found nothing above the spectral window edge.
    #[error("no spectral components above window edge (order > {min_order})")]
    EmptyWindow { min_order: f64 },

    /// The time axis cannot represent the highest requested component.
    #[error(
        "undersampled synthesis: {samples_per_period} samples per period cannot \
         resolve order {max_order}; need at least {required}"
    )]
    Undersampled {
        samples_per_period: usize,
        max_order: f64,
        required: usize,
    },

    /// Spacing statistics need at least two detected pulses.
    #[error("pulse train has {found} peak(s); at least two are needed to measure spacing")]
    TooFewPeaks { found: usize },

    /// The propagated wavefunction lost more norm than the analysis tolerates.
    #[error(
        "over-ionization: surviving norm {norm:.3e} after {periods_done} periods \
         (more than 90% lost); weaken the drive or shorten the run"
    )]
    OverIonization { norm: f64, periods_done: usize },

    /// A cached artifact exists but cannot be used.
    #[error("cache entry unusable: {0}")]
    CacheInvalid(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),

    /// Dense fallback diagonalization failed in the backing LAPACK call.
    #[error("dense eigensolve failed: {0}")]
    DenseEig(String),

    /// An eigenvector is numerically self-orthogonal under the c-product and
    /// cannot be c-normalized (a known pathology of non-Hermitian problems
    /// near coalescing eigenvalues).
    #[error("state is self-orthogonal: |c-norm| {cnorm_abs:.3e} too small to normalize")]
    SelfOrthogonal { cnorm_abs: f64 },
}

fn format_candidates(candidates: &[(C64, f64)]) -> String {
    candidates
        .iter()
        .map(|(e, ov)| format!("({:.6}{:+.6}i, |overlap| {:.4})", e.re, e.im, ov))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// Convenience constructor for i/o failures tagged with the path.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
