use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {h} is outside the admissible range of family `{family}`")]
    Domain { family: String, h: f64 },

    #[error("levels must satisfy {lower_name} < {upper_name}, got {lower} >= {upper}")]
    Ordering {
        lower_name: &'static str,
        upper_name: &'static str,
        lower: f64,
        upper: f64,
    },

    #[error("rate function is negative: H({r}) = {value}")]
    NegativeRate { r: f64, value: f64 },

    #[error("usage: {0}")]
    Usage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series is not a unit: constant term is zero")]
    NonUnit,

    #[error("Neumann remainder has norm {norm} >= 1, inversion does not converge")]
    NeumannDivergence { norm: f64 },

    #[error("series is not divisible by t: constant term is {constant}")]
    NotDivisible { constant: String },

    #[error("index {index} exceeds truncation cap {cap}")]
    Cap { index: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no regularizing coordinate change found; tried magnitudes {tried:?}")]
    Regularization { tried: Vec<f64> },

    #[error("division setup failed: {0}")]
    DivisionSetup(String),

    #[error("division did not converge after {iterations} iterations (residual {residual:e})")]
    DivisionConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<crate::weierstrass::DivisionResult>,
    },

    #[error("least-squares solver stalled after {iterations} iterations (residual {residual:e})")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("polynomial degree cap {cap} reached with achieved error {achieved:e} (target {target:e})")]
    Approximation { cap: usize, achieved: f64, target: f64 },

    #[error("grid blocks or truncations do not match")]
    BlockMismatch,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
