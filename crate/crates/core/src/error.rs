use thiserror::Error;

/// Errors raised by estimators, cost functions, solvers and the harness.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A log-density returned NaN or +inf (or -inf where a positive value is required).
    #[error("non-finite {density} at sample {index} (value {value})")]
    Evaluation {
        density: &'static str,
        index: usize,
        value: f64,
    },

    /// An optional capability (sampler, analytic normalizer) is missing.
    #[error("missing capability: {0}")]
    Capability(&'static str),

    /// The umbrella density |phi_bar - q| is numerically zero.
    #[error("degenerate umbrella density: acceptance rate {rate:e} after {attempts} proposals")]
    DegenerateDensity { rate: f64, attempts: u64 },

    /// A ratio denominator summed to zero.
    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),

    /// A fixed-point iterate became non-finite or non-positive.
    #[error("fixed-point iteration diverged after {} steps", trace.len().saturating_sub(1))]
    Divergence { trace: Vec<f64> },

    /// A density that appears in a denominator is exactly zero at a sample.
    #[error("{density} is zero at sample {index}")]
    ZeroDensity { density: &'static str, index: usize },

    /// An absolute-value denominator of the umbrella iteration vanished.
    #[error("singular umbrella iterate Z_t = {iterate} at sample {index}")]
    SingularIterate { iterate: f64, index: usize },

    /// Both densities are zero so the classification posterior is undefined.
    #[error("posterior undefined: phi and q are both zero")]
    UndefinedPosterior,

    /// The objective is +inf (or NaN) over the whole search grid.
    #[error("no feasible point: objective is infinite on the whole grid")]
    NoFeasiblePoint,

    /// Multivariate optimization stalled.
    #[error("optimization failed ({reason}); last iterate {last:?}")]
    Optimization { reason: &'static str, last: Vec<f64> },

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Invalid user input to the harness.
    #[error("usage: {0}")]
    Usage(String),

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
