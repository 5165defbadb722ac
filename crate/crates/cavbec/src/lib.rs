//! Steady state, stability, and output-field power spectra of a driven
//! optical cavity coupled to the Bogoliubov mode of an interacting
//! one-dimensional Bose-Einstein condensate.
//!
//! The collective density excitation of the condensate plays the role of the
//! mechanical oscillator of an optomechanical cavity, and two-body collisions
//! enter through the s-wave scattering frequency. The crate provides:
//!
//! - [`params`]: conversion of laboratory inputs into dimensionless model
//!   parameters (recoil units throughout),
//! - [`steady`]: the nonlinear mean-field fixed point and its branches,
//! - [`lindyn`]: the linearized drift matrix, Routh-Hurwitz / eigenvalue
//!   stability, and normal-mode splitting,
//! - [`spectra`]: closed-form phase-noise, intensity, and quadrature-squeezing
//!   spectra of the output field, plus an independent transfer-matrix route
//!   for every correlator,
//! - [`calib`]: the splitting-vs-collision calibration curve and its
//!   inversion, which estimates the s-wave scattering frequency from a
//!   measured normal-mode splitting,
//! - [`cli`]: scenario/figure runners and file output backing the `cavbec`
//!   binary.
//!
//! All frequencies inside the library are expressed in units of the recoil
//! frequency of the condensate atoms; SI values appear only at the [`params`]
//! boundary.

pub mod calib;
pub mod cli;
pub mod exec;
pub mod lindyn;
pub mod params;
pub mod spectra;
pub mod steady;

pub use params::{derive_model_params, mechanical_frequency, ModelParams, PhysicalParams};
pub use steady::{solve_steady_state, BranchPolicy, WorkingPoint};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library, split between input validation and
/// numeric conditions so the CLI can map them onto distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    Validation {
        field: &'static str,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("no stable steady-state branch")]
    NoStableBranch,

    #[error("{count} stable steady-state branches; selection under OnlyStable is ambiguous")]
    AmbiguousBranch { count: usize },

    #[error("branch index {index} out of range ({count} branches)")]
    BranchIndex { index: usize, count: usize },

    #[error("stability flags are not filled on the working-point list")]
    UnfilledStability,

    #[error("Routh-Hurwitz and eigenvalue stability verdicts disagree (margin {margin:.3e})")]
    InconsistentStability { margin: f64 },

    #[error("a normal mode is overdamped (purely real eigenvalue); splitting undefined")]
    OverdampedMode,

    #[error("inner radicand negative ({radicand:.6e}); peak approximation has no real roots")]
    ComplexRoot { radicand: f64 },

    #[error("outer radicand negative ({radicand:.6e}); lower peak frequency undefined")]
    NegativeSquare { radicand: f64 },

    #[error("susceptibility pole at omega = {omega} (|1/chi| < 1e-12)")]
    PoleOnGrid { omega: f64 },

    #[error("resolvent (i omega I - M) singular at omega = {omega}")]
    SingularResolvent { omega: f64 },

    #[error("thermal occupancies must be zero (n_ph = {n_ph}, n_c = {n_c})")]
    NonzeroThermalOccupancy { n_ph: f64, n_c: f64 },

    #[error("calibration curve has no stable samples")]
    EmptyCurve,

    #[error("measured splitting {value} outside tabulated range [{lo}, {hi}] (recoil units)")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI error record on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "Validation",
            Error::Config(_) => "Config",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::NoStableBranch => "NoStableBranch",
            Error::AmbiguousBranch { .. } => "AmbiguousBranch",
            Error::BranchIndex { .. } => "BranchIndex",
            Error::UnfilledStability => "UnfilledStability",
            Error::InconsistentStability { .. } => "InconsistentStability",
            Error::OverdampedMode => "OverdampedMode",
            Error::ComplexRoot { .. } => "ComplexRoot",
            Error::NegativeSquare { .. } => "NegativeSquare",
            Error::PoleOnGrid { .. } => "PoleOnGrid",
            Error::SingularResolvent { .. } => "SingularResolvent",
            Error::NonzeroThermalOccupancy { .. } => "NonzeroThermalOccupancy",
            Error::EmptyCurve => "EmptyCurve",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }

    /// Exit code the CLI maps this error to: 2 for validation/config
    /// problems, 3 for numeric conditions, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. }
            | Error::Config(_)
            | Error::UnknownPreset(_)
            | Error::Json(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
