//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (relative defect {defect:.3e})")]
    NonSymmetric { defect: f64 },

    #[error("potential matrix is not positive definite (min eigenvalue {min_eig:.6e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("invalid temperature {t}")]
    InvalidTemperature { t: f64 },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("mode subset is empty")]
    EmptySubset,

    #[error("mode index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },

    #[error("unphysical state: symplectic eigenvalue {nu:.9} below the vacuum floor")]
    UnphysicalState { nu: f64 },

    #[error("symplectic spectrum pairing mismatch ({gap:.3e} relative)")]
    PairingMismatch { gap: f64 },

    #[error("invalid partition: {0}")]
    BadPartition(String),

    #[error("propagator lost symplecticity (defect {defect:.3e}); raise n_steps_on")]
    SymplecticityLost { defect: f64 },

    #[error("no heat input: Q_in = 0")]
    NoHeatInput,

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
