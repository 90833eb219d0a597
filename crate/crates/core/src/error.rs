use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown axis label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate axis label `{0}`")]
    DuplicateLabel(String),
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("operator is singular or ill-conditioned (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("numerical routine failed to converge: {0}")]
    Convergence(String),
    #[error("adjoint check failed (relative mismatch {0:.3e})")]
    AdjointMismatch(f64),
    #[error("invalid geometry: {}", .0.join("; "))]
    Geometry(Vec<String>),
    #[error("{what} needs dimension {needed}, above the cap {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },
    #[error("transfer operator is not primitive: {0}")]
    NotPrimitive(String),
    #[error("supports do not match: {0}")]
    SupportMismatch(String),
    #[error("commutator too large ({what}: {residual:.3e})")]
    NonCommuting { what: String, residual: f64 },
    #[error("ground space is not what the caller required: {0}")]
    GroundSpace(String),
    #[error("degenerate data series: {0}")]
    DegenerateSeries(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } => 3,
            Error::Hypothesis(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
