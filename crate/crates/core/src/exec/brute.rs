//! Exhaustive evaluation over finite input domains, used as the ground truth
//! for what coverage a method admits.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::ast::CallKey;
use crate::cases::{Origin, SearchSpace, VarKind};
use crate::value::Scalar;

use super::coverage::{compute_coverage, same_finding, CoverageTarget};
use super::{evaluate_case, CoverageReport, Event, ExecError, MethodTarget, Outcome};

pub const MAX_COMBINATIONS: u128 = 1_000_000;

/// Finite value sets per parameter, per scalar field and per mocked call.
/// A mocked call contributes one variable per static call site, each ranging
/// over the call's domain. Fields without a domain keep their default value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domains {
    #[serde(default)]
    pub params: BTreeMap<String, Vec<Scalar>>,
    #[serde(default)]
    pub fields: BTreeMap<String, Vec<Scalar>>,
    #[serde(default)]
    pub mocks: BTreeMap<CallKey, Vec<Scalar>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("{combinations} combinations exceed the limit of {MAX_COMBINATIONS}")]
    DomainTooLarge { combinations: u128 },
    #[error("empty domain for `{0}`")]
    EmptyDomain(String),
    #[error("no domain declared for `{0}`")]
    MissingDomain(String),
    #[error(transparent)]
    Contract(#[from] ExecError),
}

/// Runs every combination of the domains and reports the union of outcome
/// pairs, with the pairs that no combination reaches listed as unreachable.
pub fn brute_force_max_coverage(
    target: &MethodTarget<'_>,
    domains: &Domains,
    fuel: u64,
) -> Result<CoverageReport, BruteForceError> {
    let cov_target = CoverageTarget::of(target);
    let space = SearchSpace::of(target, &cov_target.decisions);

    let mut axes: Vec<Vec<Scalar>> = Vec::with_capacity(space.len());
    for var in &space.vars {
        let name = var.kind.to_string();
        let values = match &var.kind {
            VarKind::Param(n) => domains.params.get(n).ok_or(BruteForceError::MissingDomain(name.clone()))?,
            VarKind::Mock { key, .. } => domains.mocks.get(key).ok_or(BruteForceError::MissingDomain(name.clone()))?,
            VarKind::Field(n) => match domains.fields.get(n) {
                Some(values) => values,
                None => {
                    axes.push(vec![Scalar::default_for(var.ty)]);
                    continue;
                }
            },
        };
        if values.is_empty() {
            return Err(BruteForceError::EmptyDomain(name));
        }
        axes.push(values.clone());
    }
    let combinations = axes.iter().fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128));
    if combinations > MAX_COMBINATIONS {
        return Err(BruteForceError::DomainTooLarge { combinations });
    }

    // Keep only traces that add a pair or a finding; the union is the same.
    let mut covered: BTreeSet<Outcome> = BTreeSet::new();
    let mut seen: Vec<Event> = Vec::new();
    let mut kept = Vec::new();
    let mut index = vec![0usize; axes.len()];
    for n in 0..combinations {
        let values: Vec<Scalar> = index.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let case = space.to_case(format!("{}#brute{n}", target.qualified_name()), &values, Origin::Fuzzed, None);
        let trace = evaluate_case(target, &case, fuel)?;
        let new_pair = trace.outcomes.iter().any(|o| !covered.contains(o));
        let new_event: Vec<&Event> = trace
            .events
            .iter()
            .filter(|e| !seen.iter().any(|s| same_finding(s, e)))
            .collect();
        if new_pair || !new_event.is_empty() {
            covered.extend(trace.outcomes.iter().copied());
            seen.extend(new_event.into_iter().cloned());
            kept.push(trace);
        }
        // Odometer increment, last axis fastest.
        for pos in (0..index.len()).rev() {
            index[pos] += 1;
            if index[pos] < axes[pos].len() {
                break;
            }
            index[pos] = 0;
        }
    }

    let mut report = compute_coverage(&kept, std::slice::from_ref(&cov_target)).expect("traces come from this target");
    let m = &mut report.methods[0];
    m.unreachable = Some(cov_target.all_pairs().difference(&m.pairs_covered).copied().collect());
    Ok(report)
}
