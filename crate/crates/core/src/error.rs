use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// The witnessing sample behind a failed constant certification.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub check: &'static str,
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub c_prime: Option<Vec<f64>>,
    pub observed: f64,
    pub limit: f64,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: observed {:e} against limit {:e} at x={:?}, c={:?}",
            self.check, self.observed, self.limit, self.x, self.c
        )?;
        if let Some(cp) = &self.c_prime {
            write!(f, ", c'={cp:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not strictly interior to the body")]
    NotInterior,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error(
        "damped Newton did not converge after {iterations} iterations (decrement {decrement:e})"
    )]
    NoConvergence { iterations: usize, decrement: f64 },
    #[error("convex body has an empty interior")]
    EmptyInterior,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a query is already pending; feed its observation first")]
    PendingQuery,
    #[error("no query is pending")]
    NoPendingQuery,
    #[error("context coordinate {value} lies outside [0, 1]")]
    OutOfCube { value: f64 },
    #[error("context does not lie in cell {cell}")]
    NotInCell { cell: usize },
    #[error("fixed context sequence exhausted at round index {0}")]
    ExhaustedSequence(usize),
    #[error("minimizer oracle failed: {0}")]
    OracleFailure(String),
    #[error("certification failed: {0}")]
    CertificationFailed(Box<Witness>),
    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the batch CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
            Error::OracleFailure(_) => 4,
            Error::Io(_) => 1,
            Error::Seed { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
