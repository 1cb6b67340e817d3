//! Advisor pipeline shared by `advise` and `run`.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use ultgen_core::advisor::{
    build_trends, gap_report, ingest, recommend, train_model, AdvisorWarning, ComponentTrend, GapReport,
    ModelParams, RecommendOptions, Recommendation, TrainOptions, TrendPoint,
};

pub const BUGS_FILE: &str = "bugs.jsonl";
pub const COMMITS_FILE: &str = "commits.jsonl";
pub const COVERAGE_FILE: &str = "coverage.jsonl";
pub const MAP_FILE: &str = "components.json";

#[derive(Debug, Clone)]
pub struct AdviceInputs {
    pub bugs: PathBuf,
    pub commits: PathBuf,
    pub coverage: PathBuf,
    pub map: PathBuf,
}

impl AdviceInputs {
    pub fn in_dir(dir: &std::path::Path) -> Self {
        AdviceInputs {
            bugs: dir.join(BUGS_FILE),
            commits: dir.join(COMMITS_FILE),
            coverage: dir.join(COVERAGE_FILE),
            map: dir.join(MAP_FILE),
        }
    }

    pub fn paths(&self) -> [&PathBuf; 4] {
        [&self.bugs, &self.commits, &self.coverage, &self.map]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub weights: ultgen_core::advisor::Weights,
    pub bias: f64,
    pub coverage_helps: bool,
    pub samples: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Advice {
    pub model: ModelSummary,
    pub recommendations: Vec<Recommendation>,
    pub gaps: GapReport,
    pub warnings: Vec<AdvisorWarning>,
    #[serde(skip)]
    pub params: ModelParams,
    #[serde(skip)]
    pub trends: Vec<ComponentTrend>,
}

pub fn advise(inputs: &AdviceInputs, options: &RecommendOptions) -> Result<Advice> {
    let data = ingest(&inputs.bugs, &inputs.commits, &inputs.coverage, &inputs.map)?;
    let (trends, mut warnings) = build_trends(&data.bugs, &data.commits, &data.coverage, &data.map);
    let mut all = data.warnings;
    all.append(&mut warnings);
    let params = train_model(&trends, TrainOptions::default()).context("training the risk model")?;
    let recommendations = ultgen_core::advisor::recommend_all(&params, &trends, options)?;
    Ok(Advice {
        model: ModelSummary {
            weights: params.weights,
            bias: params.bias,
            coverage_helps: params.coverage_helps(),
            samples: params.samples,
            final_loss: *params.loss_history.last().expect("trained"),
        },
        gaps: gap_report(&recommendations),
        recommendations,
        warnings: all,
        params,
        trends,
    })
}

impl Advice {
    /// Recomputes the recommendations with a fresh conditional coverage for
    /// the named components, keeping the rest of each latest trend point.
    pub fn with_measured(&self, measured: &[(String, f64)], options: &RecommendOptions) -> Result<Vec<Recommendation>> {
        let mut out = Vec::new();
        for trend in &self.trends {
            let mut state: TrendPoint = trend.latest().cloned().context("empty trend")?;
            if let Some((_, pct)) = measured.iter().find(|(c, _)| *c == trend.component) {
                state.conditional_pct = *pct;
            }
            out.push(recommend(&self.params, &trend.component, &state, options)?);
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.model;
        out.push_str(&format!(
            "model: {} samples, w_cov {:.3}, w_churn {:.3}, w_prior {:.3}, bias {:.3}{}\n",
            m.samples,
            m.weights.cov,
            m.weights.churn,
            m.weights.prior,
            m.bias,
            if m.coverage_helps { "" } else { " (coverage not predictive; fallback targets)" }
        ));
        for r in &self.recommendations {
            out.push_str(&format!(
                "{}: current {:.1}, recommended {:.1}{}\n",
                r.component,
                r.current_conditional_pct,
                r.recommended_conditional_pct,
                if r.highlight { "  <- raise" } else { "" }
            ));
        }
        out.push('\n');
        out.push_str(&self.gaps.to_table());
        out
    }
}
