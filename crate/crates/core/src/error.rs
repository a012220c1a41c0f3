use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("labeling violates the increment rule around black vertex {vertex}")]
    BadLabeling { vertex: usize },
    #[error("root label must be 0, found {0}")]
    BadRootLabel(i64),
    #[error("rejection budget exceeded after {attempts} attempts")]
    BudgetExceeded { attempts: u64 },
    #[error("not a bridge: {0}")]
    NotABridge(String),
    #[error("malformed excursion: {0}")]
    MalformedExcursion(String),
    #[error("map is not bipartite")]
    NotBipartite,
    #[error("map has no distinguished vertex")]
    NotPointed,
    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("map is disconnected")]
    Disconnected,
    #[error("n = {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
