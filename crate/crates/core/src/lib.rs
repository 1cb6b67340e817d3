//! Unit-level test generation for CUT-lang classes.
//!
//! The crate covers the whole pipeline: parsing the class subset
//! ([`parser`]), extracting decisions and conditions ([`decision`]),
//! emitting fixture/test/mock scaffolding ([`scaffold`]), generating and
//! selecting robustness cases ([`cases`]), executing them with
//! condition/decision tracing ([`exec`]) and recommending per-component
//! coverage targets from bug history ([`advisor`]).

pub mod advisor;
pub mod ast;
pub mod cases;
pub mod decision;
pub mod error;
pub mod exec;
pub mod fingerprint;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod rng;
pub mod scaffold;
pub mod value;

pub use ast::{ClassDecl, MethodDecl, ScalarType, SourceUnit};
pub use decision::{extract_decisions, Condition, Decision, Driver};
pub use error::{ParseError, SourceError};
pub use parser::{list_dependencies, parse_source};
pub use value::Scalar;
