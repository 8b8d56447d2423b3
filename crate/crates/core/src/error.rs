use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error("link is not simplicial")]
    NonSimplicialLink,
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("mismatched complexes: {0}")]
    Mismatch(String),
    #[error("invalid graph of spaces: {0}")]
    InvalidGos(String),
    #[error("horizontal quotient is not strict")]
    NonStrict,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("search budget exhausted")]
    Exhausted,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
