use thiserror::Error;

/// Errors raised by the dynamics, verification and shift-space routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {point} lies outside the domain {domain}")]
    OutsideDomain { point: String, domain: String },

    #[error("orbit meets the critical set at step {index} (point {point})")]
    Singularity { index: usize, point: String },

    #[error("resource budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ambiguous branch itinerary at step {index}: {reason}")]
    Ambiguous { index: usize, reason: String },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient precision: error radius {radius:e} exceeds {requested:e}")]
    Precision { radius: f64, requested: f64 },
}

impl Error {
    /// Short machine-readable tag, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutsideDomain { .. } => "domain",
            Error::Singularity { .. } => "singularity",
            Error::Budget { .. } => "budget",
            Error::Capability(_) => "capability",
            Error::InvalidInput(_) => "invalid_input",
            Error::Ambiguous { .. } => "ambiguity",
            Error::Convergence { .. } => "convergence",
            Error::Hypothesis(_) => "hypothesis",
            Error::Precondition(_) => "precondition",
            Error::Precision { .. } => "precision",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
