use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("element `{symbol}` is outside the supported vocabulary")]
    Vocabulary { symbol: String },
    #[error("charged atom at position {pos}")]
    Charge { pos: usize },
    #[error("multi-fragment input at position {pos}")]
    Fragment { pos: usize },
    #[error("valence error on atom {atom}: {message}")]
    Valence { atom: usize, message: String },
    #[error("invalid molecular graph: {0}")]
    Graph(String),
    #[error("pattern error at position {pos}: {message}")]
    Pattern { pos: usize, message: String },
    #[error("{file}:{line}: {message}")]
    Table {
        file: String,
        line: usize,
        message: String,
    },
    #[error("atom {atom} ({element}) matches no atom type")]
    Untypeable { atom: usize, element: String },
    #[error("fingerprint length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, ChemError>;
