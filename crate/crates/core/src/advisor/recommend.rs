//! Coverage targets per component and the list of gaps to raise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::ModelParams;
use super::trend::{ComponentTrend, TrendPoint};

pub const FLOOR: f64 = 70.0;
pub const CEILING: f64 = 95.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendOptions {
    /// Highest acceptable predicted risk.
    pub tau: f64,
    /// Candidate targets, tried in ascending order.
    pub grid: Vec<f64>,
}

impl Default for RecommendOptions {
    fn default() -> Self {
        RecommendOptions {
            tau: 0.3,
            grid: vec![70.0, 75.0, 80.0, 85.0, 90.0, 95.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rationale {
    pub risk_at_current: f64,
    pub risk_at_recommended: f64,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub component: String,
    pub recommended_conditional_pct: f64,
    pub current_conditional_pct: f64,
    pub highlight: bool,
    pub rationale: Rationale,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecommendError {
    #[error("the model has not been trained")]
    UntrainedModel,
    #[error("component `{0}` has no trend data")]
    NoState(String),
}

/// Target for one component given its latest trend point.
///
/// With a model where coverage lowers risk, the target is the smallest grid
/// value whose predicted risk is at most `tau` (the grid maximum if none
/// is), never below the current coverage. Otherwise the target falls back
/// to the larger of current coverage and the median coverage of components
/// that never had a bug. Either way it is clamped to [70, 95].
pub fn recommend(
    model: &ModelParams,
    component: &str,
    state: &TrendPoint,
    options: &RecommendOptions,
) -> Result<Recommendation, RecommendError> {
    if model.loss_history.is_empty() {
        return Err(RecommendError::UntrainedModel);
    }
    let current = state.conditional_pct;
    let mut grid = options.grid.clone();
    grid.sort_by(f64::total_cmp);

    let fallback_used = !model.coverage_helps();
    let target = if fallback_used {
        current.max(model.zero_bug_median.unwrap_or(FLOOR))
    } else {
        let pick = grid
            .iter()
            .copied()
            .find(|&c| model.risk_at(state, c) <= options.tau)
            .or_else(|| grid.last().copied())
            .unwrap_or(CEILING);
        pick.max(current)
    };
    let recommended = target.clamp(FLOOR, CEILING);
    Ok(Recommendation {
        component: component.to_string(),
        recommended_conditional_pct: recommended,
        current_conditional_pct: current,
        highlight: recommended > current + 1.0,
        rationale: Rationale {
            risk_at_current: model.risk_at(state, current),
            risk_at_recommended: model.risk_at(state, recommended),
            fallback_used,
        },
    })
}

/// One recommendation per trend, from its latest point, in trend order.
pub fn recommend_all(
    model: &ModelParams,
    trends: &[ComponentTrend],
    options: &RecommendOptions,
) -> Result<Vec<Recommendation>, RecommendError> {
    trends
        .iter()
        .map(|t| {
            let state = t.latest().ok_or_else(|| RecommendError::NoState(t.component.clone()))?;
            recommend(model, &t.component, state, options)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub component: String,
    pub current_conditional_pct: f64,
    pub recommended_conditional_pct: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub gaps: Vec<GapRow>,
}

/// Highlighted components, largest gap first, ties by component name.
pub fn gap_report(recommendations: &[Recommendation]) -> GapReport {
    let mut gaps: Vec<GapRow> = recommendations
        .iter()
        .filter(|r| r.highlight)
        .map(|r| GapRow {
            component: r.component.clone(),
            current_conditional_pct: r.current_conditional_pct,
            recommended_conditional_pct: r.recommended_conditional_pct,
            gap: r.recommended_conditional_pct - r.current_conditional_pct,
        })
        .collect();
    gaps.sort_by(|a, b| b.gap.total_cmp(&a.gap).then_with(|| a.component.cmp(&b.component)));
    GapReport { gaps }
}

impl GapReport {
    /// 0 when nothing needs raising, 2 when there are gaps.
    pub fn exit_code(&self) -> i32 {
        if self.gaps.is_empty() {
            0
        } else {
            2
        }
    }

    pub fn to_table(&self) -> String {
        if self.gaps.is_empty() {
            return "no coverage gaps\n".to_string();
        }
        let width = self.gaps.iter().map(|g| g.component.len()).max().unwrap_or(0).max("component".len());
        let mut out = format!("{:<width$}  {:>7}  {:>11}  {:>5}\n", "component", "current", "recommended", "gap");
        for g in &self.gaps {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.1}  {:>11.1}  {:>5.1}",
                g.component, g.current_conditional_pct, g.recommended_conditional_pct, g.gap
            );
        }
        out
    }
}
