//! Test cases: configured functional cases and fuzzed robustness cases.

pub mod config;
pub mod fuzz;
pub mod generate;
pub mod select;
pub mod space;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::CallKey;
use crate::value::Scalar;

pub use config::{expand_configured_cases, load_case_config, CaseConfig, ConfigError, ConfiguredCase, Diagnostic, DiagnosticKind, MethodConfig};
pub use fuzz::{fuzz_candidates, FuzzCandidates, FuzzError};
pub use generate::{generate_cases, method_targets, GenerateError, GenerateOptions, GeneratedCases};
pub use select::{greedy_select, CandidateStatus, Selection};
pub use space::{SearchSpace, VarKind, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Configured,
    Fuzzed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedInfo {
    pub seed: u64,
    pub index: u64,
}

/// Concrete inputs for one execution of a method: parameter values, scalar
/// field values and the scripted returns of every mocked call.
///
/// Scripts are consumed one value per call in execution order; once a
/// script runs out its last value repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub id: String,
    pub class: String,
    pub method: String,
    #[serde(default)]
    pub params: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub fields: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub mocks: BTreeMap<CallKey, Vec<Scalar>>,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_info: Option<SeedInfo>,
}

#[derive(Debug, Error)]
pub enum CaseFileError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes cases as JSON lines, one case per line.
pub fn write_jsonl<W: Write>(mut out: W, cases: &[TestCase]) -> std::io::Result<()> {
    for case in cases {
        serde_json::to_writer(&mut out, case)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl(cases: &[TestCase]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, cases).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Reads a JSONL case file; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TestCase>, CaseFileError> {
    let mut cases = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let case = serde_json::from_str(&line).map_err(|e| CaseFileError::Schema {
            line: i + 1,
            message: e.to_string(),
        })?;
        cases.push(case);
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_keeps_mock_keys_readable() {
        let case = TestCase {
            id: "A.f#0".into(),
            class: "A".into(),
            method: "f".into(),
            params: BTreeMap::from([("x".into(), Scalar::Int(1))]),
            fields: BTreeMap::new(),
            mocks: BTreeMap::from([("c.getStatus".parse().unwrap(), vec![Scalar::Int(3)])]),
            origin: Origin::Fuzzed,
            seed_info: Some(SeedInfo { seed: 42, index: 0 }),
        };
        let text = to_jsonl(std::slice::from_ref(&case));
        assert_eq!(
            text,
            "{\"id\":\"A.f#0\",\"class\":\"A\",\"method\":\"f\",\"params\":{\"x\":1},\"fields\":{},\
             \"mocks\":{\"c.getStatus\":[3]},\"origin\":\"fuzzed\",\"seed_info\":{\"seed\":42,\"index\":0}}\n"
        );
        assert_eq!(read_jsonl(text.as_bytes()).unwrap(), vec![case]);
    }

    #[test]
    fn bad_line_is_reported_with_its_number() {
        let text = "\n{\"id\":\"x\"}\n";
        match read_jsonl(text.as_bytes()) {
            Err(CaseFileError::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
