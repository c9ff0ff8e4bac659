use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("cannot combine a {0} transformation with a {1} transformation")]
    SpeciesMismatch(&'static str, &'static str),
    #[error("invalid cavity geometry: {0}")]
    Geometry(String),
    #[error("h = {0} is outside the perturbative range (0, 0.5)")]
    PerturbativeRange(f64),
    #[error("quadrature did not converge: change {delta:e} after {panels} panels")]
    Quadrature { delta: f64, panels: usize },
    #[error("order extraction failed: {0}")]
    Fit(String),
    #[error("zeroth-order matrix is singular")]
    Singular,
    #[error("mode {0} is outside the window")]
    ModeOutOfWindow(i64),
    #[error("invalid mode selection: {0}")]
    InvalidModes(String),
    #[error("occupation {occupation} exceeds the cap {cap} with nonzero amplitude")]
    CapExceeded { occupation: usize, cap: usize },
    #[error("Pauli exclusion: mode {0} is already occupied")]
    Pauli(i64),
    #[error("annihilation conditions disagree by {0:e}")]
    InconsistentVacuum(f64),
    #[error("matrix is not Hermitian: deviation {0:e}")]
    NotHermitian(f64),
    #[error("leading order is ambiguous: slope {0:.4}")]
    AmbiguousSlope(f64),
    #[error("no closed form for {0}")]
    NoClosedForm(String),
    #[error("unsupported boundary parameter s = {0}")]
    BoundaryParameter(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
