use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid projection: {0}")]
    InvalidProjection(String),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("coordinate {value} at row {row}, column {col} lies outside [0, 1]")]
    Domain { row: usize, col: usize, value: f64 },
    #[error("invalid base {0}: must be at least 2")]
    InvalidBase(u64),
    #[error("unsupported dimension {dim} (supported up to {max})")]
    UnsupportedDimension { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shift bound {0} outside (0, 1]")]
    InvalidShiftBound(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("complexity budget exceeded: {required} units required, budget {budget}")]
    ComplexityBudgetExceeded { required: f64, budget: f64 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("loss is not a scalar (shape {rows}x{cols})")]
    NotAScalar { rows: usize, cols: usize },
    #[error("tape already consumed by a backward pass; reset it first")]
    TapeConsumed,
    #[error("invalid radius {radius}: must lie in [0, {max}]")]
    InvalidRadius { radius: f64, max: f64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training diverged at step {step}")]
    TrainingDiverged {
        step: u64,
        /// Parameters of the best model seen before divergence.
        last_finite: Option<Box<crate::gnn::MpmcModel>>,
    },
    #[error("all {0} search trials failed")]
    SearchFailed(usize),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by exceeding a resource budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::ComplexityBudgetExceeded { .. })
    }

    /// True for numerical failures (divergence, non-finite values).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TrainingDiverged { .. } | Error::Numerical(_) | Error::SearchFailed(_)
        )
    }
}
