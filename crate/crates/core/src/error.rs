use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything the engine can refuse or fail at.
///
/// Variants split into two families: validation failures (bad parameters,
/// arguments outside a transform strip, unsupported payoffs) and numerical
/// failures (a quadrature or contour sum that would not converge). The CLI maps
/// the first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("Re p = {re} outside the strip ({lo}, {hi}): {context}")]
    Strip {
        re: f64,
        lo: f64,
        hi: f64,
        context: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge ({context}): {panels} panels, last change {change:e}")]
    Quadrature {
        context: String,
        panels: usize,
        change: f64,
    },

    #[error("contour inversion failed: {reason} (p_max = {p_max}, nodes = {nodes}); {hint}")]
    Contour {
        reason: String,
        p_max: f64,
        nodes: usize,
        hint: &'static str,
    },

    #[error("least-squares fit rejected: {0}")]
    Fit(String),

    #[error("Monte Carlo fit: {0}")]
    Bracketing(String),

    #[error("convergence check failed: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure rather than of its inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Contour { .. }
                | Error::Fit(_)
                | Error::Bracketing(_)
                | Error::Convergence(_)
        )
    }

    pub(crate) fn invalid(name: &'static str, value: f64, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            constraint: constraint.into(),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be finite and > 0"))
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be finite"))
    }
}
