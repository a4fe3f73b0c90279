use thiserror::Error;

/// Errors raised by the forecasting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // ingestion
    #[error("non-positive price {price} at timestamp {timestamp}")]
    NonPositivePrice { timestamp: i64, price: f64 },
    #[error("timestamps not strictly increasing at {timestamp}")]
    UnorderedTimestamps { timestamp: i64 },
    #[error("timestamp {timestamp} is not on the {step}s grid")]
    GridMisaligned { timestamp: i64, step: i64 },
    #[error("missing price at grid point {timestamp} (strict mode)")]
    GridGap { timestamp: i64 },
    #[error("day starting at {day_start} has fewer than two observed prices")]
    EmptyDay { day_start: i64 },
    #[error("no complete days in the price series")]
    NoCompleteDays,
    #[error("grid step {0}s does not divide a day")]
    BadGridStep(i64),
    #[error("panel is already demeaned")]
    AlreadyDemeaned,
    #[error("panel is not demeaned")]
    NotDemeaned,
    #[error("curves do not share a common grid")]
    GridMismatch,

    // fpca
    #[error("degenerate panel: covariance has rank 0")]
    DegeneratePanel,
    #[error("all eigenvalues are zero")]
    AllZeroEigenvalues,
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    // score models
    #[error("series is degenerate (zero variance)")]
    DegenerateSeries,
    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
    #[error("singular regressor matrix")]
    SingularRegressor,
    #[error("conditional covariance is not positive definite")]
    NonPsdH,

    // forecast
    #[error("score covariance is not positive semidefinite")]
    NonPsdCov,
    #[error("insufficient history: need {need}, have {have}")]
    InsufficientHistory { need: usize, have: usize },

    // rolling
    #[error("insufficient data: need {need} returns, have {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("horizon k={k} must satisfy 1 <= k < T={t}")]
    BadHorizon { k: usize, t: usize },
    #[error("singular design matrix")]
    SingularDesign,

    // eval
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid interval bounds at index {0}")]
    InvalidBounds(usize),
    #[error("loss differential has zero variance")]
    ZeroVarianceDifferential,
    #[error("series too short: need more than {max_lag} points, have {len}")]
    SeriesTooShort { len: usize, max_lag: usize },

    // sim
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_) | BadHorizon { .. } | InvalidSpec(_) | BadGridStep(_) => ErrorClass::Config,
            DegeneratePanel
            | AllZeroEigenvalues
            | DegenerateSeries
            | NonConvergence(_)
            | SingularRegressor
            | NonPsdH
            | NonPsdCov
            | SingularDesign
            | ZeroVarianceDifferential => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NonPositivePrice { .. } => "NonPositivePrice",
            UnorderedTimestamps { .. } => "UnorderedTimestamps",
            GridMisaligned { .. } => "GridMisaligned",
            GridGap { .. } => "GridGap",
            EmptyDay { .. } => "EmptyDay",
            NoCompleteDays => "NoCompleteDays",
            BadGridStep(_) => "BadGridStep",
            AlreadyDemeaned => "AlreadyDemeaned",
            NotDemeaned => "NotDemeaned",
            GridMismatch => "GridMismatch",
            DegeneratePanel => "DegeneratePanel",
            AllZeroEigenvalues => "AllZeroEigenvalues",
            IndexOutOfRange { .. } => "IndexOutOfRange",
            DegenerateSeries => "DegenerateSeries",
            NonConvergence(_) => "NonConvergence",
            SingularRegressor => "SingularRegressor",
            NonPsdH => "NonPsdH",
            NonPsdCov => "NonPsdCov",
            InsufficientHistory { .. } => "InsufficientHistory",
            InsufficientData { .. } => "InsufficientData",
            BadHorizon { .. } => "BadHorizon",
            SingularDesign => "SingularDesign",
            LengthMismatch(..) => "LengthMismatch",
            InvalidBounds(_) => "InvalidBounds",
            ZeroVarianceDifferential => "ZeroVarianceDifferential",
            SeriesTooShort { .. } => "SeriesTooShort",
            InvalidSpec(_) => "InvalidSpec",
            Precondition(_) => "Precondition",
            Config(_) => "ConfigInvalid",
            Io(_) => "IoError",
            Parse(_) => "ParseError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
