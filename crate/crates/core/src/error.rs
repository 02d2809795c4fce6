use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not place spin {index} after {attempts} attempts (density too high for r_min)")]
    Capacity { index: usize, attempts: usize },

    #[error("coincident positions: pair separation is zero")]
    CoincidentPositions,

    #[error("Hilbert space dimension {dim} exceeds the dense limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("local dimension mismatch: expected {expected}, got {got}")]
    LocalDimMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("observable {0} is not defined for this local dimension")]
    IncompatibleObservable(&'static str),

    #[error("eigendecomposition failed to produce a unitary basis")]
    Diagonalization,

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("product-state ansatz breaks down: |<psi0|U^2|psi0>| = {overlap:e}")]
    AnsatzBreakdown { overlap: f64 },

    #[error("empty disorder ensemble")]
    EmptyEnsemble,

    #[error("invalid window ({start}, {end}] for a trace of length {len}")]
    Window {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("frequency {nu} does not fall on the grid of a {n}-bin spectrum")]
    OffGrid { nu: f64, n: usize },

    #[error("spectrum has zero total power")]
    ZeroPower,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no DTC window: fitted maximum fraction {f_max} is below threshold {threshold}")]
    NoDtcWindow { f_max: f64, threshold: f64 },

    #[error("unit parse error in {input:?}: {reason}")]
    Units { input: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing inputs: {}", .0.join(", "))]
    MissingInputs(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
