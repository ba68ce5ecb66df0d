use std::path::PathBuf;

use thiserror::Error;

use crate::dispersion::Branch;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or configuration.
    Validation,
    /// The request is well formed but physically unrealizable or outside the
    /// material model.
    Physics,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "{branch} branch of {material}: wavelength {wavelength_um:.6} um is outside the valid range [{min_um}, {max_um}] um"
    )]
    OutOfRange {
        material: String,
        branch: Branch,
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("invalid material data: {0}")]
    InvalidMaterial(String),

    #[error("invalid design targets: {0}")]
    InvalidTargets(String),

    #[error(
        "degenerate design: the spectral-bandwidth radicand (beta'_s/sigma_i)^2 + (beta'_i/sigma_s)^2 - ... evaluates to {radicand:e}, which is not positive"
    )]
    DegenerateDesign { radicand: f64 },

    #[error(
        "no real incidence angle: sin(theta) = k_p c / (n_p omega_p) = {sin_theta:.6} has magnitude above 1"
    )]
    NoRealAngle { sin_theta: f64 },

    #[error("unknown coherence-length convention '{0}' (expected one of c/l, 2c/l, pi*c/l, 2pi*c/l, sqrt2*c/l)")]
    UnknownConvention(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("at grid point (omega_s = {omega_s:e}, omega_i = {omega_i:e}) rad/s: {source}")]
    GridPoint {
        omega_s: f64,
        omega_i: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate joint spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("pump-to-photon coordinate map is singular: beta'_s + beta'_i = {sum:e}")]
    SingularMapping { sum: f64 },

    #[error("unusable chi(2) pathway '{label}': tensor element is zero")]
    UnusablePathway { label: String },

    #[error("{pathway} pathway: {source}")]
    Pathway {
        pathway: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} published values fall outside tolerance after calibration")]
    CalibrationMismatch { failed: usize, total: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidMaterial(_)
            | Error::InvalidTargets(_)
            | Error::UnknownConvention(_)
            | Error::InvalidGrid(_)
            | Error::Config(_)
            | Error::Json { .. } => ErrorKind::Validation,
            Error::OutOfRange { .. }
            | Error::DegenerateDesign { .. }
            | Error::NoRealAngle { .. }
            | Error::DegenerateSpectrum(_)
            | Error::SingularMapping { .. }
            | Error::UnusablePathway { .. }
            | Error::CalibrationMismatch { .. } => ErrorKind::Physics,
            Error::GridPoint { source, .. } | Error::Pathway { source, .. } => source.kind(),
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
