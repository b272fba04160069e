use thiserror::Error;

/// Errors produced by the library. Report-valued checks (axiom scans,
/// hypcon scans, hyperconvexity verdicts) never use this type for a
/// negative answer; it is reserved for invalid input and violated
/// preconditions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("radius of empty set undefined")]
    EmptySet,

    #[error("ground set of size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("label `{0}` cannot be written to a file")]
    InvalidLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("point index {index} out of range for ground set of size {size}")]
    PointOutOfRange { index: usize, size: usize },

    #[error("ground sets do not match")]
    GroundMismatch,

    #[error("invalid rational `{0}`")]
    InvalidRational(String),

    #[error("set function must vanish on the empty set")]
    NonzeroOnEmpty,

    #[error("table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: usize },

    #[error("not a diversity: {0}")]
    NotADiversity(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid glue: {0}")]
    InvalidGlue(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("point is not feasible: {0}")]
    InfeasiblePoint(String),

    #[error("coordinate {0} is unbounded below")]
    UnboundedCoordinate(usize),

    #[error("function is not in P_X: family {family} has sum {sum} < {rhs}")]
    NotInPx { family: String, sum: String, rhs: String },

    #[error("radius function violates the family inequality at {family}: {sum} < {rhs}")]
    RadiusFamilyViolated { family: String, sum: String, rhs: String },

    #[error("function is not a tight-span point")]
    NotTight,

    #[error("empty point set")]
    EmptyPointSet,

    #[error("start set is not invariant under the map")]
    NotInvariant,

    #[error("start set is not admissible")]
    NotAdmissible,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
