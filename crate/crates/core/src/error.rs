use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no path between vertices {0} and {1}")]
    Unreachable(usize, usize),

    #[error("predicate `{predicate}` is not supported on {space} spaces")]
    UnsupportedPredicate {
        predicate: &'static str,
        space: &'static str,
    },

    #[error("infeasible: {customers} customers exceed total capacity {capacity}")]
    Infeasible { customers: usize, capacity: usize },

    #[error("brute-force oracle limit exceeded: total capacity {capacity} > {limit}")]
    OracleLimit { capacity: usize, limit: usize },

    #[error("no free facility left")]
    CapacityExhausted,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("algorithm `{algorithm}` cannot run on {space} spaces")]
    IncompatibleSpace {
        algorithm: &'static str,
        space: &'static str,
    },

    #[error("customer {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("not reducible to a cow-path run: {0}")]
    NotReducible(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
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
        // serde_json already renders "at line L column C"
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
