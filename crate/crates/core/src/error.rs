use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument `{field}`: {message}")]
    Argument { field: String, message: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point ({x}, {y}) lies outside the tabulated exponent range")]
    OutOfDomain { x: f64, y: f64 },

    #[error("Luxemburg bracket diverged: modular is not finite for any scale")]
    Divergence,

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("solver did not reach tolerance after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<crate::solver::SolveResult>,
    },

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn argument(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Argument {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable code used in the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::Argument { .. } => "argument",
            LabError::Geometry(_) => "geometry",
            LabError::OutOfDomain { .. } => "out_of_domain",
            LabError::Divergence => "divergence",
            LabError::Resolution(_) => "resolution",
            LabError::NonConvergence { .. } => "non_convergence",
            LabError::Config(_) => "config",
            LabError::Io(_) => "io",
            LabError::Csv(_) => "csv",
        }
    }

    /// Offending field name, when one applies.
    pub fn field(&self) -> Option<&str> {
        match self {
            LabError::Argument { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
