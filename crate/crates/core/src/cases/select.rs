//! Greedy selection of fuzzed candidates by coverage gain.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::exec::coverage::{compute_coverage, same_finding, CoverageTarget};
use crate::exec::{evaluate_case, CoverageReport, Event, ExecutionTrace, MethodTarget, Outcome};

use super::TestCase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason")]
pub enum CandidateStatus {
    Kept,
    Discarded,
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub kept: Vec<TestCase>,
    pub traces: Vec<ExecutionTrace>,
    /// One entry per evaluated candidate, in candidate order.
    pub statuses: Vec<(String, CandidateStatus)>,
    pub report: CoverageReport,
    /// Covered pair count after each evaluated candidate.
    pub progress: Vec<usize>,
}

/// Keeps a candidate iff it covers a new (entity, outcome) pair or raises a
/// crash kind at a site not seen before. Stops once every pair is covered or
/// the candidates run out. Candidates the evaluator rejects are recorded as
/// `Invalid` and skipped.
pub fn greedy_select(
    target: &MethodTarget<'_>,
    candidates: impl IntoIterator<Item = TestCase>,
    fuel: u64,
) -> Selection {
    let cov_target = CoverageTarget::of(target);
    let all = cov_target.all_pairs();
    let mut covered: BTreeSet<Outcome> = BTreeSet::new();
    let mut seen: Vec<Event> = Vec::new();
    let mut kept = Vec::new();
    let mut traces = Vec::new();
    let mut statuses = Vec::new();
    let mut progress = Vec::new();

    for case in candidates {
        if covered.len() == all.len() {
            break;
        }
        let status = match evaluate_case(target, &case, fuel) {
            Err(e) => CandidateStatus::Invalid(e.to_string()),
            Ok(trace) => {
                let new_pair = trace.outcomes.iter().any(|o| !covered.contains(o));
                let fresh: Vec<Event> = trace
                    .events
                    .iter()
                    .filter(|e| !seen.iter().any(|s| same_finding(s, e)))
                    .cloned()
                    .collect();
                if new_pair || !fresh.is_empty() {
                    covered.extend(trace.outcomes.iter().copied());
                    seen.extend(fresh);
                    traces.push(trace);
                    kept.push(case.clone());
                    CandidateStatus::Kept
                } else {
                    CandidateStatus::Discarded
                }
            }
        };
        statuses.push((case.id, status));
        progress.push(covered.len());
    }

    let report = compute_coverage(&traces, std::slice::from_ref(&cov_target)).expect("traces come from this target");
    Selection {
        kept,
        traces,
        statuses,
        report,
        progress,
    }
}
