use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable moduli space: genus {genus}, {markings} markings")]
    Unstable { genus: u32, markings: u32 },
    #[error("unsupported genus {0} (supported range is 0..=2)")]
    UnsupportedGenus(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unstable multiset entry ({genus},{markings}): 2g+m must exceed 2")]
    UnstableEntry { genus: u32, markings: u32 },
    #[error("multiset is not realizable by a stable graph: {0}")]
    NotRealizable(String),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("mixed ambient spaces: {0}")]
    MixedAmbient(String),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
