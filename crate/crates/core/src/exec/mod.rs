//! Deterministic execution of test cases against parsed method bodies, with
//! condition/decision outcome tracing.

pub mod brute;
pub mod coverage;
mod eval;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{ClassDecl, MethodDecl, SourceUnit, Span};
use crate::decision::{extract_decisions, Decision};
use crate::error::SourceError;
use crate::fingerprint::method_fingerprint;
use crate::value::Scalar;

pub use brute::{brute_force_max_coverage, BruteForceError, Domains};
pub use coverage::{compute_coverage, CoverageError, CoverageReport, MethodCoverage, Rollup};
pub use eval::evaluate_case;
pub(crate) use eval::mock_return_type;

pub const DEFAULT_FUEL: u64 = 10_000;

/// A method resolved inside its unit, ready to be executed.
#[derive(Debug, Clone)]
pub struct MethodTarget<'a> {
    pub unit: &'a SourceUnit,
    pub class: &'a ClassDecl,
    pub method: &'a MethodDecl,
    pub fingerprint: String,
}

impl<'a> MethodTarget<'a> {
    pub fn new(unit: &'a SourceUnit, class: &str, method: &str) -> Result<Self, SourceError> {
        let class_decl = unit
            .class(class)
            .ok_or_else(|| SourceError::UnknownClass(class.to_string()))?;
        let method_decl = class_decl.method(method).ok_or_else(|| SourceError::UnknownMethod {
            class: class.to_string(),
            method: method.to_string(),
        })?;
        Ok(Self::from_decls(unit, class_decl, method_decl))
    }

    pub fn from_decls(unit: &'a SourceUnit, class: &'a ClassDecl, method: &'a MethodDecl) -> Self {
        MethodTarget {
            unit,
            class,
            method,
            fingerprint: method_fingerprint(class, method),
        }
    }

    pub fn decisions(&self) -> Vec<Decision> {
        extract_decisions(&self.class.name, self.method)
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.class.name, self.method.name)
    }
}

/// A decision or one of its conditions, identified within its method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entity {
    Decision(u32),
    Condition { decision: u32, index: u32 },
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Decision(d) => write!(f, "D{d}"),
            Entity::Condition { decision, index } => write!(f, "C{decision}.{index}"),
        }
    }
}

impl Serialize for Entity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An observed (entity, truth value) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    pub entity: Entity,
    pub value: bool,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.entity, if self.value { 'T' } else { 'F' })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Site {
    pub line: u32,
    pub column: u32,
}

impl From<Span> for Site {
    fn from(span: Span) -> Self {
        Site {
            line: span.line,
            column: span.column,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum Event {
    AssertFailure { site: Site },
    DivByZero { site: Site },
    UnmockedCall { site: Site, call: String },
    FuelExhausted,
}

impl Event {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Event::AssertFailure { .. } => "AssertFailure",
            Event::DivByZero { .. } => "DivByZero",
            Event::UnmockedCall { .. } => "UnmockedCall",
            Event::FuelExhausted => "FuelExhausted",
        }
    }

    pub fn site(&self) -> Option<Site> {
        match self {
            Event::AssertFailure { site } | Event::DivByZero { site } | Event::UnmockedCall { site, .. } => {
                Some(*site)
            }
            Event::FuelExhausted => None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site() {
            Some(site) => write!(f, "{} at {site}", self.kind_name()),
            None => f.write_str(self.kind_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "event")]
pub enum Terminal {
    Normal,
    Crashed(Event),
}

impl Terminal {
    pub fn is_normal(&self) -> bool {
        matches!(self, Terminal::Normal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionTrace {
    pub case_id: String,
    pub class: String,
    pub method: String,
    pub fingerprint: String,
    pub outcomes: BTreeSet<Outcome>,
    pub events: Vec<Event>,
    pub terminal: Terminal,
    pub steps: u64,
    pub return_value: Option<Scalar>,
}

/// A case that does not fit the method it targets.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("contract violation in case `{case}`: {message}")]
    ContractViolation { case: String, message: String },
}
