use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("isometry has no axis ({0})")]
    NoAxis(&'static str),
    #[error("planes not pairwise disjoint")]
    PlanesNotDisjoint,
    #[error("radius cap exceeded: {requested} > {cap}")]
    RadiusCapExceeded { requested: usize, cap: usize },
    #[error("outside ball: geodesic length {length} exceeds radius {radius}")]
    OutsideBall { length: usize, radius: usize },
    #[error("ball inconsistent: {0}")]
    BallInconsistent(String),
    #[error("identity has no axis")]
    IdentityHasNoAxis,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("oracle unusable: {0}")]
    OracleUnusable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("square root undefined at branch point")]
    SquareRootUndefined,
    #[error("h not loxodromic")]
    HNotLoxodromic,
    #[error("no bracketing interval")]
    NoBracket,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
