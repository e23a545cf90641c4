use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("episode trace is empty")]
    EmptyTrace,
    #[error("batch window is empty")]
    EmptyWindow,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("action {action} out of range for {count} actions")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("non-finite value at feature index {0}")]
    NonFinite(usize),
    #[error("corpus of {size} points cannot support {clusters} clusters")]
    CorpusTooSmall { size: usize, clusters: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("trace does not chain at transition {0}")]
    BrokenChain(usize),
}
