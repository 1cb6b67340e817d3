//! Shared test support: fixture loading, the oracle evaluator and the
//! random program generator.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::Deserialize;
use ultgen_core::exec::{evaluate_case, Domains, Event, MethodTarget, Terminal};
use ultgen_core::rng::SplitMix64;
use ultgen_core::{parse_source, SourceUnit};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Every `.cut` file under `dir`, in path order, joined into one unit.
pub fn load_dir(dir: &std::path::Path) -> SourceUnit {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cut"))
        .collect();
    paths.sort();
    let text: String = paths.iter().map(|p| fs::read_to_string(p).unwrap() + "\n").collect();
    parse_source(&text, &dir.to_string_lossy()).unwrap()
}

pub fn corpus() -> SourceUnit {
    load_dir(&fixtures().join("corpus/src"))
}

/// class -> method -> domains.
pub fn corpus_domains() -> BTreeMap<String, BTreeMap<String, Domains>> {
    let text = fs::read_to_string(fixtures().join("corpus/domains.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct PlantedFault {
    pub class: String,
    pub method: String,
    pub kind: String,
}

pub fn planted_faults() -> Vec<PlantedFault> {
    let text = fs::read_to_string(fixtures().join("corpus/planted.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct FixtureModel {
    pub bias: f64,
    pub cov_weight: f64,
}

#[derive(Debug, Deserialize)]
pub struct FixtureComponent {
    pub name: String,
    pub current: f64,
}

#[derive(Debug, Deserialize, PartialEq)]
pub struct ExpectedGap {
    pub component: String,
    pub current: f64,
    pub recommended: f64,
    pub gap: f64,
}

/// A hand-worked gap report: a one-feature model, components at given
/// coverage, and the rows the report must hold.
#[derive(Debug, Deserialize)]
pub struct GapFixture {
    pub model: FixtureModel,
    pub tau: f64,
    pub components: Vec<FixtureComponent>,
    pub expected: Vec<ExpectedGap>,
}

pub const GAP_FIXTURES: [&str; 3] = ["no_gap", "one_gap", "tie"];

pub fn gap_fixture(name: &str) -> GapFixture {
    let text = fs::read_to_string(fixtures().join(format!("gaps/{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

impl GapFixture {
    pub fn model(&self) -> ultgen_core::advisor::ModelParams {
        use ultgen_core::advisor::{ModelParams, TrainOptions, Weights};
        ModelParams {
            weights: Weights { cov: self.model.cov_weight, churn: 0.0, prior: 0.0 },
            bias: self.model.bias,
            std_weights: [self.model.cov_weight, 0.0, 0.0],
            std_bias: self.model.bias,
            feature_mean: [0.0; 3],
            feature_scale: [1.0; 3],
            churn_max: 0.0,
            zero_bug_median: None,
            samples: 0,
            options: TrainOptions::default(),
            loss_history: vec![0.0],
        }
    }

    pub fn recommendations(&self) -> Vec<ultgen_core::advisor::Recommendation> {
        use ultgen_core::advisor::{recommend, RecommendOptions, TrendPoint};
        let model = self.model();
        let opts = RecommendOptions { tau: self.tau, ..RecommendOptions::default() };
        self.components
            .iter()
            .map(|c| {
                let point = TrendPoint {
                    period: "2020-01".parse().unwrap(),
                    bug_count: 0,
                    conditional_pct: c.current,
                    functional_pct: 100.0,
                    churn_lines: 0,
                };
                recommend(&model, &c.name, &point, &opts).unwrap()
            })
            .collect()
    }
}

/// Trends and trained model for the planted history.
pub fn planted_model(seed: u64) -> (Vec<ultgen_core::advisor::ComponentTrend>, ultgen_core::advisor::ModelParams) {
    use ultgen_core::advisor::synthetic::planted_history;
    use ultgen_core::advisor::{build_trends, train_model, TrainOptions};
    let h = planted_history(seed, 50, 12);
    let (trends, _) = build_trends(&h.bugs, &h.commits, &h.coverage, &h.map);
    let model = train_model(&trends, TrainOptions::default()).unwrap();
    (trends, model)
}

/// Coverage fraction at which `model` predicts risk `tau` for a component
/// with no bugs and the given churn, by bisection on [0, 1].
pub fn risk_boundary(model: &ultgen_core::advisor::ModelParams, churn_lines: u64, tau: f64) -> f64 {
    let point = ultgen_core::advisor::TrendPoint {
        period: "2020-01".parse().unwrap(),
        bug_count: 0,
        conditional_pct: 0.0,
        functional_pct: 100.0,
        churn_lines,
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        if model.risk_at(&point, mid * 100.0) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

#[derive(Debug, Default)]
pub struct Tally {
    pub pairs: usize,
    pub disagreements: usize,
    /// Terminal kinds seen: normal, div, assert, unmocked, fuel.
    pub kinds: [usize; 5],
}

/// Runs `methods` random methods with `cases_per` cases each, printing the
/// first few disagreements.
pub fn compare(seed: u64, methods: usize, cases_per: usize) -> Tally {
    let mut rng = SplitMix64::new(seed);
    let mut tally = Tally::default();
    for i in 0..methods {
        let m = gen::random_method(&mut rng);
        let unit = parse_source(&m.source, "rand.cut").unwrap_or_else(|e| panic!("{e}\n{}", m.source));
        let target = MethodTarget::new(&unit, "R", "m").unwrap();
        for j in 0..cases_per {
            let case = gen::random_case(&mut rng, &m, i * cases_per + j);
            let fuel = [5, 60, 10_000][rng.below(3) as usize];
            let main = evaluate_case(&target, &case, fuel).unwrap();
            let oracle = oracle::oracle_run(&unit, "R", "m", &case, fuel);
            let same = main.outcomes == oracle.outcomes
                && main.terminal == oracle.terminal
                && main.return_value == oracle.return_value;
            tally.pairs += 1;
            tally.kinds[match &oracle.terminal {
                Terminal::Normal => 0,
                Terminal::Crashed(Event::DivByZero { .. }) => 1,
                Terminal::Crashed(Event::AssertFailure { .. }) => 2,
                Terminal::Crashed(Event::UnmockedCall { .. }) => 3,
                Terminal::Crashed(_) => 4,
            }] += 1;
            if !same {
                tally.disagreements += 1;
                if tally.disagreements <= 3 {
                    eprintln!("disagreement on {}\n{}\ncase {case:?}\nmain {main:?}\noracle {oracle:?}", case.id, m.source);
                }
            }
        }
    }
    tally
}

