use thiserror::Error;

/// Malformed N-Quads input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("projected variable ?{0} does not occur in the pattern")]
    Projection(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RaError {
    #[error("schema mismatch in {op}: {left:?} vs {right:?}")]
    SchemaMismatch { op: &'static str, left: Vec<String>, right: Vec<String> },
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("duplicate attribute '{0}'")]
    DuplicateAttribute(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("no value assigned to identifier '{0}'")]
    UnboundIdentifier(String),
}

/// Any failure of the end-to-end pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("data: {0}")]
    Data(#[from] SyntaxError),
    #[error("query: {0}")]
    Query(#[from] QueryError),
    #[error("relational algebra: {0}")]
    Ra(#[from] RaError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
