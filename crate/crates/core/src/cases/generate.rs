//! Configured plus fuzzed cases for a whole class or unit, with the
//! coverage they reach.

use serde::Serialize;
use thiserror::Error;

use crate::ast::SourceUnit;
use crate::exec::coverage::{compute_coverage, CoverageTarget};
use crate::exec::{evaluate_case, CoverageReport, ExecError, ExecutionTrace, MethodTarget};

use super::{expand_configured_cases, fuzz_candidates, greedy_select, CaseConfig, Diagnostic, FuzzError, Origin, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerateOptions {
    pub budget: usize,
    pub seed: u64,
    pub fuel: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("{method}: {source}")]
    Fuzz { method: String, source: FuzzError },
    #[error(transparent)]
    Configured(#[from] ExecError),
}

#[derive(Debug, Clone)]
pub struct GeneratedCases {
    /// Configured cases first, then kept fuzzed cases, method by method.
    pub cases: Vec<TestCase>,
    pub traces: Vec<ExecutionTrace>,
    pub diagnostics: Vec<Diagnostic>,
    pub report: CoverageReport,
}

impl GeneratedCases {
    pub fn count(&self, origin: Origin) -> usize {
        self.cases.iter().filter(|c| c.origin == origin).count()
    }
}

/// Methods with a body, in declaration order, of every non-extern class
/// (or only `class`), further narrowed to `method` when given.
pub fn method_targets<'a>(unit: &'a SourceUnit, class: Option<&str>, method: Option<&str>) -> Vec<MethodTarget<'a>> {
    unit.classes
        .iter()
        .filter(|c| !c.is_extern && class.is_none_or(|n| n == c.name))
        .flat_map(|c| {
            c.methods
                .iter()
                .filter(|m| m.has_body && method.is_none_or(|n| n == m.name))
                .map(move |m| MethodTarget::from_decls(unit, c, m))
        })
        .collect()
}

/// For each target: every configured case is kept, then fuzzed candidates
/// are greedily selected on top of the coverage the configured cases reach.
/// A method left with no case at all keeps its first fuzzed candidate.
/// Pools in `config` override the fuzz defaults.
pub fn generate_cases(
    targets: &[MethodTarget<'_>],
    config: &CaseConfig,
    options: GenerateOptions,
) -> Result<GeneratedCases, GenerateError> {
    let mut cases = Vec::new();
    let mut traces = Vec::new();
    let mut diagnostics = Vec::new();
    let unit = targets.first().map(|t| t.unit);
    let (configured, diags) = match unit {
        Some(u) => expand_configured_cases(config, u),
        None => (Vec::new(), Vec::new()),
    };

    for target in targets {
        let class = &target.class.name;
        let method = &target.method.name;
        let own: Vec<TestCase> = configured
            .iter()
            .filter(|c| &c.class == class && &c.method == method)
            .cloned()
            .collect();
        diagnostics.extend(
            diags
                .iter()
                .filter(|d| own.iter().any(|c| c.id == d.case))
                .cloned(),
        );
        for case in &own {
            traces.push(evaluate_case(target, case, options.fuel)?);
        }

        let decisions = target.decisions();
        let fuzzed = fuzz_candidates(target, &decisions, options.budget, options.seed, config.pools(class, method))
            .map_err(|source| GenerateError::Fuzz {
                method: target.qualified_name(),
                source,
            })?;
        let first = fuzzed.cases.first().cloned();
        let selection = greedy_select(target, own.iter().cloned().chain(fuzzed.cases), options.fuel);
        let before = cases.len();
        cases.extend(own);
        for (case, trace) in selection.kept.into_iter().zip(selection.traces) {
            if case.origin == Origin::Fuzzed {
                cases.push(case);
                traces.push(trace);
            }
        }
        // A method with nothing to cover still gets one case to run.
        if cases.len() == before {
            if let Some(case) = first {
                if let Ok(trace) = evaluate_case(target, &case, options.fuel) {
                    cases.push(case);
                    traces.push(trace);
                }
            }
        }
    }

    let cov_targets: Vec<CoverageTarget> = targets.iter().map(CoverageTarget::of).collect();
    let report = compute_coverage(&traces, &cov_targets).expect("traces come from these targets");
    Ok(GeneratedCases {
        cases,
        traces,
        diagnostics,
        report,
    })
}
