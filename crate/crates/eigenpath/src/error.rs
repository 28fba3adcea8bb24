use thiserror::Error;

/// Errors surfaced by the eigenpath laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground state degenerate at s={s}: gap {gap:.3e} below tolerance {tol:.3e}")]
    DegenerateGroundState { s: f64, gap: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("path is not frustration-free at s={s}: ground energy {energy:.3e}")]
    NotFrustrationFree { s: f64, energy: f64 },

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("operation requires a linear path")]
    NotLinearKind,

    #[error("dimension {dim} exceeds configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
