use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance table row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("negative distance at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("nonzero diagonal entry at ({i}, {i})")]
    NonzeroDiagonal { i: usize },
    #[error("asymmetric distances at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("edge {edge} has endpoint out of range for {n} locations")]
    EdgeEndpoint { edge: usize, n: usize },
    #[error("edge {edge} has negative or non-finite length")]
    NegativeEdge { edge: usize },

    #[error("location {index} is out of range for {n} locations")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("location {index} is listed more than once across clients/red/blue")]
    DuplicateLocation { index: usize },
    #[error("location {index} is not assigned a role (client, red or blue)")]
    UnassignedLocation { index: usize },
    #[error("budget {name} = {budget} exceeds the {available} available facilities")]
    Budget { name: &'static str, budget: usize, available: usize },
    #[error("budgets k_r and k_b are both zero")]
    EmptyBudget,

    #[error("infeasible solution: {reason} {offending:?}")]
    Infeasible { reason: String, offending: Vec<usize> },
    #[error("invalid swap move: {0}")]
    InvalidMove(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("enumeration of {needed} candidates exceeds the cap of {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("solutions share facilities {0:?}; disjointify them first")]
    Overlap(Vec<usize>),
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
