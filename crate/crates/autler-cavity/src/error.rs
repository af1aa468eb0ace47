//! Error type shared by every module, with the process exit codes the CLI
//! maps each failure class to.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter failed validation (named so callers can report it).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    /// A required parameter was never supplied by config file or flags.
    #[error("missing parameter `{name}`")]
    MissingParameter { name: String },

    /// Config file contains a key outside the documented set.
    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },

    /// Config file repeats a key; the format is strict to keep runs reproducible.
    #[error("duplicate config key `{key}`")]
    DuplicateKey { key: String },

    /// A config value failed to parse as a number.
    #[error("invalid value for `{key}`: `{value}`")]
    InvalidValue { key: String, value: String },

    /// A frequency grid request was malformed (empty, zero steps, decreasing).
    #[error("invalid grid: {message}")]
    InvalidGrid { message: String },

    /// The Bloch generator cannot be inverted for a steady state.
    #[error("singular Bloch generator ({detail}); reciprocal condition estimate {rcond:.3e}")]
    SingularGenerator { rcond: f64, detail: String },

    /// The coherence generator has a non-decaying mode, so the spectrum
    /// integral diverges.
    #[error("coherence generator not damped: eigenvalue {eigenvalue} has non-negative real part")]
    GeneratorNotDamped { eigenvalue: Complex64 },

    /// A solved state violates probability or positivity constraints beyond
    /// tolerance.
    #[error("non-physical state: {detail}")]
    NonPhysicalState { detail: String },

    /// Root bracketing failed: the objective has the same sign at both ends.
    #[error(
        "no sign change over bracket [{lo}, {hi}]: f({lo}) = {f_lo:.6e}, f({hi}) = {f_hi:.6e}"
    )]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// A spectral feature spans too few grid points to measure.
    #[error("peak spans only {points} grid points (need at least 7); refine the grid")]
    PeakTooCoarse { points: usize },

    /// The trace window cuts off too much spectral weight for quadrature.
    #[error(
        "grid too narrow: estimated tail fraction {tail_fraction:.3e} exceeds 1% of the integral"
    )]
    GridTooNarrow { tail_fraction: f64 },

    /// Requested joint Hilbert space exceeds the configured safety cap.
    #[error("joint dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    /// The full model has no interference switch; only eta = 1 is meaningful.
    #[error("full-model oracle requires eta = 1 (got {eta}); interference is physical there, not switchable")]
    UnsupportedEta { eta: f64 },

    /// The Liouvillian null space is not one-dimensional.
    #[error("degenerate steady state: bordered system reciprocal condition {rcond:.3e}")]
    DegenerateSteadyState { rcond: f64 },

    /// Time-evolution fallback failed to reach stationarity.
    #[error(
        "steady-state evolution did not converge: residual {residual:.3e} after {steps} steps"
    )]
    NotConverged { residual: f64, steps: usize },

    /// Named preset is not in the registry.
    #[error("unknown preset `{name}`")]
    UnknownPreset { name: String },

    /// A LAPACK routine reported failure.
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code contract: 0 success, 2 validation, 3 model
    /// degeneracy or numerical failure, 4 I/O, 5 resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::MissingParameter { .. }
            | Error::UnknownKey { .. }
            | Error::DuplicateKey { .. }
            | Error::InvalidValue { .. }
            | Error::InvalidGrid { .. }
            | Error::PeakTooCoarse { .. }
            | Error::GridTooNarrow { .. }
            | Error::UnsupportedEta { .. }
            | Error::UnknownPreset { .. } => 2,
            Error::SingularGenerator { .. }
            | Error::GeneratorNotDamped { .. }
            | Error::NonPhysicalState { .. }
            | Error::NoSignChange { .. }
            | Error::DegenerateSteadyState { .. }
            | Error::NotConverged { .. }
            | Error::Lapack { .. } => 3,
            Error::Io(_) | Error::Json(_) => 4,
            Error::DimensionOverflow { .. } => 5,
        }
    }
}
