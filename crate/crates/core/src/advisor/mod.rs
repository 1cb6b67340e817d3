//! Coverage-target advice from bug, commit and coverage history.
//!
//! The flow is [`ingest`] → [`build_trends`] → [`train_model`] →
//! [`recommend_all`] → [`gap_report`].

pub mod ingest;
pub mod model;
pub mod recommend;
pub mod synthetic;
pub mod trend;

use std::fmt;

use serde::Serialize;

pub use ingest::{
    ingest, map_commit_to_components, parse_bugs, parse_commits, parse_component_map, parse_coverage, BugRecord,
    CommitRecord, ComponentMap, CoverageSnapshot, IngestError, Ingested, PathChange, Period, Rule, UNMAPPED,
};
pub use model::{train_model, ModelParams, TrainError, TrainOptions, Weights};
pub use recommend::{
    gap_report, recommend, recommend_all, GapReport, GapRow, Rationale, RecommendError, RecommendOptions,
    Recommendation,
};
pub use trend::{build_trends, ComponentTrend, TrendPoint};

/// Data problems that do not stop the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum AdvisorWarning {
    DuplicateRecord { file: String, line: usize, id: String },
    UnknownCommit { bug: String, culprit: String },
    UndatedCommit { commit: String },
    NoCoverage { component: String },
}

impl fmt::Display for AdvisorWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdvisorWarning::DuplicateRecord { file, line, id } => {
                write!(f, "{file}:{line}: duplicate id `{id}` ignored")
            }
            AdvisorWarning::UnknownCommit { bug, culprit } => {
                write!(f, "bug `{bug}` blames unknown commit `{culprit}`; not counted")
            }
            AdvisorWarning::UndatedCommit { commit } => {
                write!(f, "commit `{commit}` has no period and no bug dates it; churn not counted")
            }
            AdvisorWarning::NoCoverage { component } => {
                write!(f, "component `{component}` has no coverage snapshot; excluded")
            }
        }
    }
}
