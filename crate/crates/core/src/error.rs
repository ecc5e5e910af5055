use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ambient mismatch: {0:?} vs {1:?}")]
    AmbientMismatch(Vec<String>, Vec<String>),
    #[error("requested order {requested} exceeds available precision {available}")]
    InsufficientPrecision { requested: u32, available: u32 },
    #[error("constant term {0} is not a unit (must be 1 or -1)")]
    NotAUnit(String),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(String),
    #[error("missing assignment for variable `{0}`")]
    MissingVariable(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("degree bound {bound} is below the formal degree {needed} of the circuit")]
    DegreeBoundTooSmall { bound: String, needed: String },
    #[error("system is not proper: {0}")]
    NotProper(String),
    #[error("grammar is not proper: {0}")]
    ImproperGrammar(String),
    #[error("Jacobian denominator failed the unit check at stage {0}")]
    JacobianNotUnit(usize),
    #[error("truncation infeasible: {requested} requested, at most {max_feasible} supported for this many indeterminates")]
    BoundInfeasible { requested: u64, max_feasible: u64 },
    #[error("invalid bound configuration: {0}")]
    BadBound(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid automaton: {0}")]
    BadAutomaton(String),
    #[error("invalid letter order: {0}")]
    BadOrder(String),
    #[error("not letter-bounded: {0}")]
    NotLetterBounded(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },
    #[error("{0}")]
    Invalid(String),
}
