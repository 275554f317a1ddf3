use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy shared by every module. Variants map one-to-one onto the
/// CLI exit codes (see `main.rs`): invalid input, numerical failure, or a
/// missing prerequisite artifact.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantile query fell outside the range attained by the grid values.
    #[error("level {level} not bracketed by grid values in [{min}, {max}]")]
    NotBracketed { level: f64, min: f64, max: f64 },

    /// A moving-window evolution let the front reach the window edge.
    #[error("boundary contamination at step {t}: edge deviates {deviation:.3e} from its limit (tolerance {tol:.3e})")]
    BoundaryContamination { t: u32, deviation: f64, tol: f64 },

    #[error("population limit: step would produce {requested} particles (cap {cap})")]
    PopulationLimit { requested: u64, cap: u64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: u64, residual: f64 },

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),

    #[error("missing dependency: {0}")]
    MissingDependency(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for the CLI: 2 invalid input, 3 numerical failure,
    /// 4 missing prerequisite.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Json(_) => 2,
            Error::NotBracketed { .. }
            | Error::BoundaryContamination { .. }
            | Error::PopulationLimit { .. }
            | Error::NonConvergence { .. }
            | Error::NumericalUnderflow(_) => 3,
            Error::MissingDependency(_) | Error::Io(_) => 4,
        }
    }

    /// Machine-readable tag used in the error JSON emitted on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotBracketed { .. } => "not-bracketed",
            Error::BoundaryContamination { .. } => "boundary-contamination",
            Error::PopulationLimit { .. } => "population-limit",
            Error::NonConvergence { .. } => "non-convergence",
            Error::NumericalUnderflow(_) => "numerical-underflow",
            Error::MissingDependency(_) => "missing-dependency",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
