//! Per-component series of bugs, coverage and churn.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::ingest::{map_commit_to_components, BugRecord, CommitRecord, ComponentMap, CoverageSnapshot, Period};
use super::AdvisorWarning;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub period: Period,
    pub bug_count: u32,
    pub conditional_pct: f64,
    pub functional_pct: f64,
    pub churn_lines: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentTrend {
    pub component: String,
    pub series: Vec<TrendPoint>,
}

impl ComponentTrend {
    pub fn latest(&self) -> Option<&TrendPoint> {
        self.series.last()
    }
}

/// Builds one series per component that has coverage data, running from
/// its first snapshot to the last month seen in any input. Months without a
/// snapshot repeat the previous one. A bug counts for every component its
/// culprit commit touches; churn sums the lines of the month's commits.
pub fn build_trends(
    bugs: &[BugRecord],
    commits: &[CommitRecord],
    coverage: &[CoverageSnapshot],
    map: &ComponentMap,
) -> (Vec<ComponentTrend>, Vec<AdvisorWarning>) {
    let mut warnings = Vec::new();
    let by_id: HashMap<&str, &CommitRecord> = commits.iter().map(|c| (c.id.as_str(), c)).collect();
    let touched: HashMap<&str, BTreeMap<String, u64>> = commits
        .iter()
        .map(|c| (c.id.as_str(), map_commit_to_components(c, map)))
        .collect();

    // Undated commits take the month of the earliest bug blaming them.
    let mut dated: HashMap<&str, Period> = commits
        .iter()
        .filter_map(|c| c.period.map(|p| (c.id.as_str(), p)))
        .collect();
    for bug in bugs {
        if let Some(c) = by_id.get(bug.culprit.as_str()).filter(|c| c.period.is_none()) {
            let e = dated.entry(c.id.as_str()).or_insert(bug.period);
            *e = (*e).min(bug.period);
        }
    }
    for c in commits {
        if !dated.contains_key(c.id.as_str()) {
            warnings.push(AdvisorWarning::UndatedCommit { commit: c.id.clone() });
        }
    }

    let mut bug_counts: BTreeMap<(&str, Period), u32> = BTreeMap::new();
    let mut mentioned: BTreeSet<&str> = BTreeSet::new();
    for bug in bugs {
        let Some(components) = touched.get(bug.culprit.as_str()) else {
            warnings.push(AdvisorWarning::UnknownCommit {
                bug: bug.id.clone(),
                culprit: bug.culprit.clone(),
            });
            continue;
        };
        for component in components.keys() {
            *bug_counts.entry((component.as_str(), bug.period)).or_insert(0) += 1;
            mentioned.insert(component.as_str());
        }
    }
    let mut churn: BTreeMap<(&str, Period), u64> = BTreeMap::new();
    for c in commits {
        let Some(&period) = dated.get(c.id.as_str()) else { continue };
        for (component, lines) in &touched[c.id.as_str()] {
            *churn.entry((component.as_str(), period)).or_insert(0) += lines;
            mentioned.insert(component.as_str());
        }
    }

    let mut snapshots: BTreeMap<&str, BTreeMap<Period, &CoverageSnapshot>> = BTreeMap::new();
    for s in coverage {
        snapshots.entry(s.component.as_str()).or_default().insert(s.period, s);
    }
    let last = bugs
        .iter()
        .map(|b| b.period)
        .chain(dated.values().copied())
        .chain(coverage.iter().map(|s| s.period))
        .max();

    for component in &mentioned {
        if !snapshots.contains_key(component) {
            warnings.push(AdvisorWarning::NoCoverage {
                component: component.to_string(),
            });
        }
    }

    let mut trends = Vec::new();
    let Some(last) = last else { return (trends, warnings) };
    for (component, snaps) in &snapshots {
        let first = *snaps.keys().next().expect("non-empty");
        let mut current = snaps[&first];
        let series = first
            .through(last)
            .into_iter()
            .map(|period| {
                if let Some(s) = snaps.get(&period) {
                    current = s;
                }
                TrendPoint {
                    period,
                    bug_count: bug_counts.get(&(*component, period)).copied().unwrap_or(0),
                    conditional_pct: current.conditional_pct,
                    functional_pct: current.functional_pct,
                    churn_lines: churn.get(&(*component, period)).copied().unwrap_or(0),
                }
            })
            .collect();
        trends.push(ComponentTrend {
            component: component.to_string(),
            series,
        });
    }
    (trends, warnings)
}
