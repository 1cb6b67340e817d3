//! Condition/decision coverage over a set of traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::decision::Decision;

use super::{Entity, Event, ExecutionTrace, MethodTarget, Outcome};

/// The decisions of one method plus the fingerprint traces must carry.
#[derive(Debug, Clone)]
pub struct CoverageTarget {
    pub class: String,
    pub method: String,
    pub fingerprint: String,
    pub decisions: Vec<Decision>,
}

impl CoverageTarget {
    pub fn of(target: &MethodTarget<'_>) -> Self {
        CoverageTarget {
            class: target.class.name.clone(),
            method: target.method.name.clone(),
            fingerprint: target.fingerprint.clone(),
            decisions: target.decisions(),
        }
    }

    /// Every entity whose two outcomes count toward coverage.
    pub fn entities(&self) -> Vec<Entity> {
        let mut out = Vec::new();
        for d in &self.decisions {
            out.push(Entity::Decision(d.id.ordinal));
            for c in &d.conditions {
                out.push(Entity::Condition {
                    decision: c.id.decision,
                    index: c.id.index,
                });
            }
        }
        out
    }

    pub fn all_pairs(&self) -> BTreeSet<Outcome> {
        self.entities()
            .into_iter()
            .flat_map(|entity| [false, true].map(|value| Outcome { entity, value }))
            .collect()
    }

    pub fn conditions_total(&self) -> usize {
        self.decisions.iter().map(|d| d.conditions.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub case_id: String,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCoverage {
    pub class: String,
    pub method: String,
    pub fingerprint: String,
    pub conditions_total: usize,
    pub decisions_total: usize,
    pub pairs_total: usize,
    pub pairs_covered: BTreeSet<Outcome>,
    pub percent: f64,
    pub cases: usize,
    pub passing_cases: usize,
    pub findings: Vec<Finding>,
    /// Pairs no input in the supplied domains can produce; only set by the
    /// brute-force oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unreachable: Option<BTreeSet<Outcome>>,
}

impl MethodCoverage {
    pub fn is_complete(&self) -> bool {
        self.pairs_covered.len() == self.pairs_total
    }
}

/// Aggregate over a component (a class) or over everything.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rollup {
    pub component: String,
    pub methods: usize,
    pub methods_with_passing_case: usize,
    pub functional_pct: f64,
    pub pairs_total: usize,
    pub pairs_covered: usize,
    pub conditional_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub methods: Vec<MethodCoverage>,
    pub components: Vec<Rollup>,
    pub overall: Rollup,
}

impl CoverageReport {
    pub fn method(&self, class: &str, method: &str) -> Option<&MethodCoverage> {
        self.methods.iter().find(|m| m.class == class && m.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("trace `{case}` does not match any target method: {reason}")]
    MixedTargets { case: String, reason: String },
}

/// Percentage of covered pairs; a method without decisions is fully covered.
pub fn pair_percent(covered: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * covered as f64 / total as f64
    }
}

/// Unions the outcome pairs of `traces` per target method. Traces must match
/// a target by name and by AST fingerprint.
pub fn compute_coverage(traces: &[ExecutionTrace], targets: &[CoverageTarget]) -> Result<CoverageReport, CoverageError> {
    let mut methods: Vec<MethodCoverage> = targets
        .iter()
        .map(|t| MethodCoverage {
            class: t.class.clone(),
            method: t.method.clone(),
            fingerprint: t.fingerprint.clone(),
            conditions_total: t.conditions_total(),
            decisions_total: t.decisions.len(),
            pairs_total: 2 * (t.conditions_total() + t.decisions.len()),
            pairs_covered: BTreeSet::new(),
            percent: 0.0,
            cases: 0,
            passing_cases: 0,
            findings: Vec::new(),
            unreachable: None,
        })
        .collect();
    let all_pairs: Vec<BTreeSet<Outcome>> = targets.iter().map(CoverageTarget::all_pairs).collect();

    for trace in traces {
        let Some(i) = targets
            .iter()
            .position(|t| t.class == trace.class && t.method == trace.method)
        else {
            return Err(CoverageError::MixedTargets {
                case: trace.case_id.clone(),
                reason: format!("no target {}.{}", trace.class, trace.method),
            });
        };
        if targets[i].fingerprint != trace.fingerprint {
            return Err(CoverageError::MixedTargets {
                case: trace.case_id.clone(),
                reason: format!(
                    "fingerprint {} differs from {} for {}.{}",
                    trace.fingerprint, targets[i].fingerprint, trace.class, trace.method
                ),
            });
        }
        let m = &mut methods[i];
        m.cases += 1;
        if trace.terminal.is_normal() {
            m.passing_cases += 1;
        }
        m.pairs_covered
            .extend(trace.outcomes.iter().filter(|o| all_pairs[i].contains(o)));
        for event in &trace.events {
            if !m.findings.iter().any(|f| same_finding(&f.event, event)) {
                m.findings.push(Finding {
                    case_id: trace.case_id.clone(),
                    event: event.clone(),
                });
            }
        }
    }
    for m in &mut methods {
        m.percent = pair_percent(m.pairs_covered.len(), m.pairs_total);
    }

    let mut by_class: BTreeMap<&str, Vec<&MethodCoverage>> = BTreeMap::new();
    for m in &methods {
        by_class.entry(m.class.as_str()).or_default().push(m);
    }
    let components = by_class
        .iter()
        .map(|(class, ms)| rollup(class, ms))
        .collect();
    let overall = rollup("*", &methods.iter().collect::<Vec<_>>());
    Ok(CoverageReport {
        methods,
        components,
        overall,
    })
}

/// Two events are the same finding when kind and site agree.
pub fn same_finding(a: &Event, b: &Event) -> bool {
    a.kind_name() == b.kind_name() && a.site() == b.site()
}

fn rollup(component: &str, methods: &[&MethodCoverage]) -> Rollup {
    let passing = methods.iter().filter(|m| m.passing_cases > 0).count();
    let pairs_total = methods.iter().map(|m| m.pairs_total).sum();
    let pairs_covered = methods.iter().map(|m| m.pairs_covered.len()).sum();
    Rollup {
        component: component.to_string(),
        methods: methods.len(),
        methods_with_passing_case: passing,
        functional_pct: if methods.is_empty() {
            100.0
        } else {
            100.0 * passing as f64 / methods.len() as f64
        },
        pairs_total,
        pairs_covered,
        conditional_pct: pair_percent(pairs_covered, pairs_total),
    }
}
