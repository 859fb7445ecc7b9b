use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("jet is not invertible: constant coefficient is zero")]
    NonInvertibleJet,
    #[error("undefined term: {0}")]
    UndefinedTerm(String),
    #[error("undefined coefficient: summand vanishes at (n={n}, k={k})")]
    UndefinedCoefficient { n: i64, k: i64 },
    #[error("no recurrence found up to order {0}")]
    OrderExceeded(usize),
    #[error("certificate check inconclusive: {skipped} of {total} lattice points skipped")]
    Inconclusive { skipped: usize, total: usize },
    #[error("needs more terms: {required} required, {available} supplied")]
    NeedsMoreTerms { required: usize, available: usize },
    #[error("singular recurrence: leading coefficient vanishes at n={0}")]
    SingularRecurrence(i64),
    #[error("clearing factor insufficient: non-integral value at n={0}")]
    ClearingInsufficient(usize),
    #[error("recurrence mismatch: base sequence not annihilated at n={0}")]
    RecurrenceMismatch(i64),
    #[error("miracle violated: valuation {found} does not exceed r={r}")]
    MiracleViolated { r: usize, found: usize },
    #[error("summand maximum lies on the boundary")]
    BoundaryMaximum,
    #[error("unknown constant: {0}")]
    UnknownConstant(String),
    #[error("insufficient precision: {got} digits supplied, at least {need} required")]
    InsufficientPrecision { got: u32, need: u32 },
    #[error("non-convergent: {0}")]
    NonConvergent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
