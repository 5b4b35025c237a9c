use thiserror::Error;

pub type Result<T> = std::result::Result<T, BmomError>;

/// Every failure the toolkit can report.
///
/// `kind()` gives a stable machine-readable tag used by the CLI's
/// single-line error messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BmomError {
    #[error("{what} is outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("degenerate spread: variance {variance} must be positive")]
    DegenerateSpread { variance: f64 },

    #[error("insufficient data: need more than {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("zero variance: residual sum of squares is zero, densities are undefined")]
    ZeroVariance,

    #[error("ill-posed design: {reason} (columns: {})", columns.join(", "))]
    IllPosedDesign {
        reason: String,
        columns: Vec<String>,
    },

    #[error("ragged columns: column {column} has {got} rows, expected {expected}")]
    RaggedColumns {
        column: String,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("positivity violation: {what} = {value} must be strictly positive")]
    PositivityViolation { what: &'static str, value: f64 },

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("moment undefined: {moment} requires nu > {threshold}, got nu = {nu}")]
    MomentUndefined {
        moment: &'static str,
        threshold: f64,
        nu: f64,
    },

    #[error("numeric failure in {routine}: {diagnostics}")]
    Numeric {
        routine: &'static str,
        diagnostics: String,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("cannot parse cell {cell:?} at row {row}, column {column:?}")]
    Parse {
        row: u64,
        column: String,
        cell: String,
    },

    #[error("malformed csv: {0}")]
    Csv(String),
}

impl BmomError {
    pub fn kind(&self) -> &'static str {
        match self {
            BmomError::Domain { .. } => "domain",
            BmomError::DegenerateSpread { .. } => "degenerate-spread",
            BmomError::InsufficientData { .. } => "insufficient-data",
            BmomError::ZeroVariance => "zero-variance",
            BmomError::IllPosedDesign { .. } => "ill-posed-design",
            BmomError::RaggedColumns { .. } => "ragged-columns",
            BmomError::DimensionMismatch { .. } => "dimension-mismatch",
            BmomError::PositivityViolation { .. } => "positivity-violation",
            BmomError::IndexOutOfRange { .. } => "index-out-of-range",
            BmomError::MomentUndefined { .. } => "moment-undefined",
            BmomError::Numeric { .. } => "numeric",
            BmomError::Internal(_) => "internal",
            BmomError::Io { .. } => "io",
            BmomError::UnknownColumn(_) => "unknown-column",
            BmomError::Parse { .. } => "parse",
            BmomError::Csv(_) => "csv",
        }
    }

    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        BmomError::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(BmomError::domain(
            what,
            format!("{p} is not in the open interval (0, 1)"),
        ))
    }
}
