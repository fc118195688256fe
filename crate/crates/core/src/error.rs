use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("infinite mass: {0}")]
    InfiniteMass(String),
    #[error("unresolved: {msg} (bracket [{lo}, {hi}])")]
    Unresolved { msg: String, lo: f64, hi: f64 },
    #[error("internal consistency: {0}")]
    Inconsistent(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("mass mismatch: expected {expected}, found {found}")]
    MassMismatch { expected: f64, found: f64 },
    #[error("quadrature did not converge: estimate {value} with error {error}")]
    Quadrature { value: f64, error: f64 },
    #[error("barrier construction failed: {0}")]
    BarrierFailure(String),
    #[error("inadmissible datum: {0}")]
    Admissibility(String),
    #[error("newton divergence at t = {t}: {msg}")]
    NewtonDivergence { t: f64, msg: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Whether the root cause is a configuration, schema or I/O problem rather than a numerical one.
    pub fn is_configuration(&self) -> bool {
        matches!(self.root(), Error::Config(_) | Error::Schema(_) | Error::Io(_))
    }

    /// Innermost error with stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
