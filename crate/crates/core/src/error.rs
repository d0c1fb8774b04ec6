use thiserror::Error;

/// Errors raised by the numerical kernels and evolution engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("unsupported dimension {0} (supported: 1..=4)")]
    UnsupportedDimension(usize),
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("spectrum is (nearly) degenerate: gap {gap:e}")]
    NearDegenerate { gap: f64 },
    #[error("matrix is not Hermitian: residual {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("spectrum is not real: max |Im E| = {max_imag:e}")]
    NoRealSpectrum { max_imag: f64 },
    #[error("observable is not Hermitian: residual {residual:e}")]
    NotHermitianObservable { residual: f64 },
    #[error("positivity lost at t = {t}")]
    PositivityLost { t: f64 },
    #[error("norm underflow at t = {t}")]
    NormUnderflow { t: f64 },
    #[error("parameters sit at an exceptional point")]
    AtExceptionalPoint,
    #[error("model is not in the PT-broken regime (requires gamma^2 > omega^2)")]
    NotPtBroken,
    #[error("initial state has no closed-form solution")]
    UnsupportedInitialState,
    #[error("spectra of the two operators do not match: residual {residual:e}")]
    SpectrumMismatch { residual: f64 },
    #[error("denominator underflow in coefficient ratio")]
    DenominatorUnderflow,
    #[error("operator is not particle-hole symmetric: residual {residual:e}")]
    NotPhSymmetric { residual: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("time {t} is not on the trajectory grid")]
    OffGrid { t: f64 },
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
