use thiserror::Error;

pub type Result<T> = std::result::Result<T, GyroError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GyroError {
    #[error("empty amplitude vector")]
    EmptyVector,

    #[error("vector norm {norm} exceeds 1 beyond tolerance")]
    NormExceeded { norm: f64 },

    #[error("truncation loss {lost:.3e} exceeds tail tolerance {tol:.3e}")]
    TailMass { lost: f64, tol: f64 },

    #[error("cutoff {cutoff} too small: predicted tail {tail:.3e} > tolerance {tol:.3e}")]
    CutoffTooSmall { cutoff: usize, tail: f64, tol: f64 },

    #[error("photon number {n} exceeds cutoff {cutoff}")]
    NumberAboveCutoff { n: usize, cutoff: usize },

    #[error("state is in the {found} basis, operation expects {expected}")]
    WrongBasis {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("flat response: |d<{observable}>/dphi| = {slope:.3e} is below threshold")]
    FlatResponse { observable: &'static str, slope: f64 },

    #[error("finite-difference derivative did not converge (relative change {rel:.3e})")]
    DerivativeUnstable { rel: f64 },

    #[error("Fisher matrix is singular: parameters are unidentifiable (det = {det:.3e})")]
    Unidentifiable { det: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("objective is non-finite across the whole grid")]
    NonFiniteObjective,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GyroError {
    fn from(e: std::io::Error) -> Self {
        GyroError::Io(e.to_string())
    }
}
