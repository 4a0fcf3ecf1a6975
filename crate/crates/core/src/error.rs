use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Named model constraint that a validation error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Breakpoints must start at 0, increase strictly and end at the outer radius.
    BreakpointOrder,
    /// The near-field exponent must be non-negative.
    NearFieldExponent,
    /// Every exponent past the first must be at least `d - 1`.
    FarFieldExponent,
    /// Exponents must increase strictly with distance.
    IncreasingExponents,
    /// Amplitudes must be positive and finite.
    PositiveAmplitude,
    /// A parameter that must lie in a stated range.
    Range,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::BreakpointOrder => "breakpoint ordering 0 = R_0 < R_1 < ... < R_K = R_inf",
            Constraint::NearFieldExponent => "near-field exponent bound beta_0 >= 0",
            Constraint::FarFieldExponent => "far-field exponent bound beta_k >= d - 1",
            Constraint::IncreasingExponents => "increasing exponents beta_k < beta_(k+1)",
            Constraint::PositiveAmplitude => "positive amplitude",
            Constraint::Range => "parameter range",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} is outside the domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("{field}: {message} (violates {constraint})")]
    Validation {
        field: String,
        message: String,
        constraint: Constraint,
    },

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("atomic distribution has no density")]
    Atomic,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{}", match .line { Some(l) => format!("config line {l}: {}", .message), None => format!("config: {}", .message) })]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(
        field: impl Into<String>,
        constraint: Constraint,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
            constraint,
        }
    }

    pub(crate) fn range(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::validation(field, Constraint::Range, message)
    }

    /// Validation and configuration problems, as opposed to failures while computing.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Config { .. })
    }
}
