use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The radius-of-curvature profile has a first Fourier mode, so the
    /// curve it describes does not close up.
    #[error("closure violated: first Fourier mode {mode1:.3e} exceeds {limit:.3e}")]
    Closure { mode1: f64, limit: f64 },

    #[error("convexity lost: minimum radius of curvature {min_radius:.3e} at node {node}")]
    Convexity { min_radius: f64, node: usize },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("invalid construction parameters: {0}")]
    Spec(String),

    #[error("step rejected: minimum radius {min_radius:.3e} after step dt={dt:.3e}")]
    StepRejected { dt: f64, min_radius: f64 },

    #[error("scheme failure: {0}")]
    Scheme(String),

    #[error("run incomplete after {steps} steps (area fraction {area_fraction:.3e})")]
    IncompleteRun { steps: usize, area_fraction: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
