//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("n_sites must be odd so that x = 0 is a lattice point, got {0}")]
    EvenSites(usize),

    #[error("dense realization limited to N <= {limit}, got N = {n}")]
    DenseLimit { n: usize, limit: usize },

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("k = {k} outside the lattice Brillouin zone |k| <= {k_max}")]
    OutsideBrillouinZone { k: f64, k_max: f64 },

    #[error("eigensolver did not converge: {converged} of {requested} pairs within {max_iter} iterations")]
    NonConvergence {
        converged: usize,
        requested: usize,
        max_iter: usize,
    },

    #[error("Lanczos breakdown persisted after {0} restarts")]
    Breakdown(usize),

    #[error("window [{lo}, {hi}] selects no usable lattice points")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("amplitudes in the fit window are below the double-precision floor")]
    AmplitudeFloor,

    #[error("fit did not converge within {0} iterations")]
    FitNonConvergence(usize),

    #[error("singular normal equations in least-squares step")]
    SingularNormalEquations,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
