//! Crate-wide error type.

/// Classifies an error for process exit codes: validation problems exit
/// with 2, numerical failures with 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("hilbert space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("factor {index} is a {found} factor, expected {expected}")]
    WrongFactorKind {
        index: usize,
        expected: &'static str,
        found: &'static str,
    },

    #[error("factor index {index} out of range (space has {len} factors)")]
    FactorOutOfRange { index: usize, len: usize },

    #[error("operator is not Hermitian: max |M - M†| = {dev:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("negative rate: {name} = {value:.6e}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("invalid input {name}: {reason}")]
    InvalidInput { name: String, reason: String },

    #[error("Fock truncation inadequate: {0}; raise the truncation")]
    TruncationInadequate(String),

    #[error("integrator step size underflow at t = {t:.6e} s")]
    StepUnderflow { t: f64 },

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("density matrix invariant violated: {0}")]
    InvalidDensityMatrix(String),

    #[error("parametric drive unstable: Omega = {omega:.6e} rad/s >= Delta_c = {delta_c:.6e} rad/s (squeezing parameter diverges)")]
    SqueezeUnstable { omega: f64, delta_c: f64 },

    #[error("probe too strong: steady-state <n> = {n:.3e} exceeds limit {limit:.3e}")]
    ProbeTooStrong { n: f64, limit: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit-code class for the CLI: inputs the user can fix are
    /// `Validation`; everything arising inside the numerics is `Numerical`.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            SpaceMismatch(_)
            | WrongFactorKind { .. }
            | FactorOutOfRange { .. }
            | NegativeRate { .. }
            | InvalidInput { .. }
            | Grid(_)
            | Scenario(_)
            | Plot(_)
            | Io(_) => ErrorClass::Validation,
            NotHermitian { .. }
            | TruncationInadequate(_)
            | StepUnderflow { .. }
            | SteadyState(_)
            | InvalidDensityMatrix(_)
            | SqueezeUnstable { .. }
            | ProbeTooStrong { .. }
            | Quadrature(_)
            | Linalg(_) => ErrorClass::Numerical,
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
