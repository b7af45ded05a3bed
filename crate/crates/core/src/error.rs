use thiserror::Error;

/// Errors raised across the solver, bound engine and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("conformance error: {0}")]
    Conformance(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid sweeping law: {0}")]
    InvalidLaw(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("schedule violation at iteration {n}: {detail}")]
    ScheduleViolation { n: usize, detail: String },

    #[error("no fixed-point certificate after {iterations} iterations (residual {residual:e})")]
    NoCertificate { iterations: usize, residual: f64 },

    #[error("hypothesis [{hypothesis}] not certified: {detail}")]
    Certification {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("state space too large for exact enumeration: {size} sequences (limit {limit})")]
    StateSpaceTooLarge { size: f64, limit: f64 },

    #[error("sampler rejected {0} consecutive draws; the law is degenerate")]
    DegenerateSampler(usize),

    #[error("trajectory {id}: {source}")]
    Trajectory {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that stem from invalid input or failed certification,
    /// as opposed to a failed numerical check.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Trajectory { source, .. } => source.is_configuration(),
            Error::Io(_) => false,
            _ => true,
        }
    }
}
