use thiserror::Error;

use crate::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// Failures while reading CUT-lang source or querying a parsed unit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("type error at {node}: {message}")]
    Type { node: Span, message: String },
    #[error("duplicate {kind} `{name}` at {span}")]
    DuplicateName {
        kind: &'static str,
        name: String,
        span: Span,
    },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown method `{class}.{method}`")]
    UnknownMethod { class: String, method: String },
}
