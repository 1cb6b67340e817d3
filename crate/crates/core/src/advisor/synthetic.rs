//! Seeded synthetic history with a known bug model, for demos and for
//! checking that training recovers it.
//!
//! Each component has one commit per month (fixed size, so churn carries no
//! signal). Monthly coverage is drawn from 14 levels, 30% to 95% in steps of
//! 5, balanced and shuffled across all component-months. For the months at
//! each coverage level, exactly `round(n · planted_risk(level))` of them are
//! followed by a bug in the next month. The first month's bugs are drawn
//! with the overall bug rate.

use super::ingest::{BugRecord, CommitRecord, ComponentMap, CoverageSnapshot, PathChange, Period, Rule};
use crate::rng::SplitMix64;

pub const PLANTED_BIAS: f64 = 4.0;
pub const PLANTED_COV_WEIGHT: f64 = -6.0;

/// `sigmoid(4 - 6 · coverage_fraction)`.
pub fn planted_risk(coverage_fraction: f64) -> f64 {
    1.0 / (1.0 + (-(PLANTED_BIAS + PLANTED_COV_WEIGHT * coverage_fraction)).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedHistory {
    pub bugs: Vec<BugRecord>,
    pub commits: Vec<CommitRecord>,
    pub coverage: Vec<CoverageSnapshot>,
    pub map: ComponentMap,
}

fn shuffle<T>(v: &mut [T], rng: &mut SplitMix64) {
    for i in (1..v.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
}

pub fn component_name(i: usize) -> String {
    format!("C{i:02}")
}

pub fn planted_history(seed: u64, components: usize, periods: usize) -> PlantedHistory {
    assert!(periods >= 2);
    let mut rng = SplitMix64::new(seed);
    let levels: Vec<u32> = (0..14).map(|k| 30 + 5 * k).collect();
    let mut months: Vec<Period> = vec![Period { year: 2018, month: 1 }];
    while months.len() < periods {
        let next = months[months.len() - 1].next();
        months.push(next);
    }

    // Coverage per (component, month): the level cycle, shuffled.
    let cells = components * periods;
    let mut cov: Vec<u32> = (0..cells).map(|i| levels[i % levels.len()]).collect();
    shuffle(&mut cov, &mut rng);
    let cov_at = |c: usize, t: usize| cov[c * periods + t];

    // bug[c][t]: month t of component c has a bug.
    let mut bug = vec![vec![false; periods]; components];
    for level in &levels {
        let mut cells: Vec<(usize, usize)> = (0..components)
            .flat_map(|c| (0..periods - 1).map(move |t| (c, t)))
            .filter(|&(c, t)| cov_at(c, t) == *level)
            .collect();
        shuffle(&mut cells, &mut rng);
        let positives = (cells.len() as f64 * planted_risk(*level as f64 / 100.0)).round() as usize;
        for &(c, t) in &cells[..positives] {
            bug[c][t + 1] = true;
        }
    }
    let labelled = components * (periods - 1);
    let rate = bug.iter().flat_map(|b| &b[1..]).filter(|&&b| b).count() as f64 / labelled as f64;
    for b in bug.iter_mut() {
        b[0] = rng.unit_f64() < rate;
    }

    let mut out = PlantedHistory {
        bugs: Vec::new(),
        commits: Vec::new(),
        coverage: Vec::new(),
        map: ComponentMap {
            rules: (0..components)
                .map(|c| Rule {
                    prefix: format!("src/{}/", component_name(c).to_lowercase()),
                    component: component_name(c),
                })
                .collect(),
        },
    };
    for (t, month) in months.iter().enumerate() {
        for (c, bugs) in bug.iter().enumerate() {
            let name = component_name(c);
            let commit = format!("{}-{month}", name.to_lowercase());
            out.commits.push(CommitRecord {
                id: commit.clone(),
                paths: vec![PathChange {
                    path: format!("src/{}/main.c", name.to_lowercase()),
                    lines: 20,
                }],
                period: Some(*month),
            });
            out.coverage.push(CoverageSnapshot {
                period: *month,
                component: name.clone(),
                functional_pct: 100.0,
                conditional_pct: cov_at(c, t) as f64,
            });
            if bugs[t] {
                out.bugs.push(BugRecord {
                    id: format!("B-{name}-{month}"),
                    period: *month,
                    culprit: commit,
                });
            }
        }
    }
    out
}
