use thiserror::Error;

use crate::surface::ParamPoint;

/// Errors raised by the geometry kernels and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter point ({}, {}) lies outside the domain of `{label}`", .point.u, .point.v)]
    OutOfDomain { label: String, point: ParamPoint },

    #[error("immersion fails at ({}, {}): EG - F^2 = {gram:e}", .point.u, .point.v)]
    Degenerate { point: ParamPoint, gram: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown catalog surface `{0}`")]
    UnknownSurface(String),

    #[error("surface `{name}` expects {expected} parameters, got {got}")]
    ParameterCount { name: String, expected: usize, got: usize },

    #[error("zero tangent direction")]
    ZeroDirection,

    #[error("flat point at ({}, {})", .0.u, .0.v)]
    FlatPoint(ParamPoint),

    #[error("minimal (umbilic) point at ({}, {}): kappa^2 - k = {gap:e}", .point.u, .point.v)]
    MinimalPoint { point: ParamPoint, gap: f64 },

    #[error("sigma(x,x) and sigma(y,y) both vanish at ({}, {})", .0.u, .0.v)]
    DegenerateNormal(ParamPoint),

    #[error("frame field not available: {0}")]
    FrameUnavailable(String),

    #[error("net holonomy defect {defect:e} exceeds {limit:e}")]
    Holonomy { defect: f64, limit: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("integrability residual {residual:e} exceeds threshold {threshold:e}")]
    Incompatible { residual: f64, threshold: f64 },

    #[error("initial frame is not a positively oriented orthonormal frame (defect {0:e})")]
    BadInitialFrame(f64),

    #[error("general-class condition fails at node ({i}, {j}): {reason}")]
    NotGeneralClass { i: usize, j: usize, reason: String },

    #[error("degenerate point configuration: {0}")]
    DegeneratePoints(String),

    #[error("empty admissible interval: {0}")]
    EmptyDomain(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes shared by the command line and the C interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad arguments, selectors or files.
    Input,
    /// A tolerance or threshold was exceeded.
    Threshold,
    /// The geometry or an integrator broke down.
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::OutOfDomain { .. }
            | Error::InvalidArgument(_)
            | Error::UnknownSurface(_)
            | Error::ParameterCount { .. }
            | Error::BadInitialFrame(_)
            | Error::EmptyDomain(_)
            | Error::Format { .. }
            | Error::Io(_)
            | Error::Json(_) => ErrorCategory::Input,
            Error::Incompatible { .. } | Error::Holonomy { .. } => ErrorCategory::Threshold,
            Error::Degenerate { .. }
            | Error::ZeroDirection
            | Error::FlatPoint(_)
            | Error::MinimalPoint { .. }
            | Error::DegenerateNormal(_)
            | Error::FrameUnavailable(_)
            | Error::Integration(_)
            | Error::NotGeneralClass { .. }
            | Error::DegeneratePoints(_) => ErrorCategory::Numerical,
        }
    }
}
