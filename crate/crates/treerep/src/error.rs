use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid branching type: {0}")]
    InvalidBranching(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("not a tree homomorphism: {0}")]
    NotAHomomorphism(String),

    #[error("not a tree composition: {0}")]
    NotAComposition(String),

    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),

    #[error("codomain trees differ")]
    CodomainMismatch,

    #[error("domain trees differ")]
    DomainMismatch,

    #[error("vertex {0} is not an internal first-level vertex")]
    NotFirstLevelInternal(usize),

    #[error("invalid tree of partitions: {0}")]
    InvalidPartitionTree(String),

    #[error("tree of partitions is not realizable on the given tree")]
    NotRealizable,

    #[error("the quotient map does not match the tree of partitions: {0}")]
    QuotientMismatch(String),

    #[error("invalid subtree parameters: {0}")]
    InvalidSubtreeParameters(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded { what: &'static str, needed: String, budget: u64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
