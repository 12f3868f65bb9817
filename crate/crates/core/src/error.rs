use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {x} lies on a breakpoint of the Krein function")]
    OnBreakpoint { x: f64 },

    #[error("z = {re} + {im}i lies on the real segment [-R, R]; use the boundary value instead")]
    OnSupport { re: f64, im: f64 },

    #[error("Krein function is not 1/2 on {lo}..{hi} (value {value})")]
    NotReflectionless { lo: f64, hi: f64, value: f64 },

    #[error("truncation size {needed} exceeds the configured cap {cap}")]
    TruncationCap { needed: usize, cap: usize },

    #[error("continued-fraction closure did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("quadrature did not converge within {panels} panels (error estimate {estimate:e})")]
    QuadratureBudget { panels: usize, estimate: f64 },

    #[error("metric not computable to tolerance {tol:e} within index cap {cap}")]
    MetricTolerance { tol: f64, cap: usize },

    #[error("measure has {available} support points, need at least {needed}")]
    SupportTooSmall { available: usize, needed: usize },

    #[error("recurrence coefficient lost positivity at step {step} (value {value:e})")]
    PositivityLoss { step: usize, value: f64 },

    #[error("{gaps} gaps exceed the configured cap {cap}")]
    GapCap { gaps: usize, cap: usize },

    #[error("non-integrable density at {x}: {reason}")]
    Singular { x: f64, reason: String },

    #[error("i/o: {0}")]
    Io(String),

    #[error("sample with seed {seed} failed ({input}): {source}")]
    Sample {
        seed: u64,
        input: String,
        source: Box<Error>,
    },
}

impl Error {
    /// Whether the failure comes from the caller's input rather than from
    /// the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidInput(_) | Error::Io(_) => true,
            Error::Sample { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
