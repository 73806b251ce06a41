use thiserror::Error;

/// Errors raised by the structure, search and construction routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch in relation `{symbol}`: tuple {tuple:?} has length {found}, expected {expected}")]
    ArityMismatch {
        symbol: String,
        tuple: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("id out of range in relation `{symbol}`: tuple {tuple:?} references an id >= {universe}")]
    IdOutOfRange {
        symbol: String,
        tuple: Vec<usize>,
        universe: usize,
    },
    #[error("duplicate tuple {tuple:?} in relation `{symbol}`")]
    DuplicateTuple { symbol: String, tuple: Vec<usize> },
    #[error("relation `{0}` has arity 0")]
    ZeroArity(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("size bound exceeded: {what} needs {needed} but the bound is {bound}")]
    SizeBound { what: String, needed: String, bound: usize },
    #[error("relation `{0}` is unary; binary projections need arity >= 2")]
    UnaryRelation(String),
    #[error("element {id} is not in a universe of size {universe}")]
    NotInUniverse { id: usize, universe: usize },
    #[error("expected a single ternary relation, found {0}")]
    NotSingleTernary(String),
    #[error("not a partial semilattice: ({a},{b}) has two meets {c} and {c2}")]
    NonFunctional { a: usize, b: usize, c: usize, c2: usize },
    #[error("invalid operation table: {0}")]
    InvalidTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("algebra is not idempotent: operation `{0}`")]
    NotIdempotent(String),
    #[error("induced operation `{op}` is ill-defined on {args:?}: values {left} and {right}")]
    IllDefined {
        op: String,
        args: Vec<usize>,
        left: usize,
        right: usize,
    },
    #[error("{0}")]
    Parse(#[from] crate::identlang::ParseError),
    #[error("{0}")]
    Ident(String),
    #[error("malformed input file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
