//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ultgen_core::advisor::model::{corpus_churn_max, loss_and_grad, training_samples};
use ultgen_core::advisor::{gap_report, recommend, recommend_all, ModelParams, RecommendOptions, TrainOptions, TrendPoint, Weights};
use ultgen_core::cases::{fuzz_candidates, generate_cases, greedy_select, method_targets, CaseConfig, GenerateOptions};
use ultgen_core::exec::coverage::CoverageTarget;
use ultgen_core::exec::{brute_force_max_coverage, Event, DEFAULT_FUEL};
use ultgen_core::fingerprint::sha256_hex;
use ultgen_core::parse_source;
use ultgen_core::rng::SplitMix64;
use ultgen_core::scaffold::{generate_scaffold, measure_generation_ratio};

use support::{corpus, corpus_domains, fixtures, gap_fixture, planted_faults, planted_model, GAP_FIXTURES};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn golden_scaffold() -> Check {
    let start = Instant::now();
    let dir = fixtures().join("example");
    let unit = parse_source(&fs::read_to_string(dir.join("a.cut")).unwrap(), "a.cut").map_err(|e| e.to_string())?;
    let bundle = generate_scaffold(&unit, "A").map_err(|e| e.to_string())?;
    let mut mismatched = Vec::new();
    let mut files = 0;
    for f in bundle.files() {
        files += 1;
        let golden = fs::read_to_string(dir.join("golden").join(&f.name)).unwrap_or_default();
        if golden != f.text {
            mismatched.push(f.name.clone());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        mismatched.is_empty() && files == 3 && secs < 1.0,
        format!("{files} files, mismatched {mismatched:?}, {secs:.3} s"),
    )
}

fn generation_ratio() -> Check {
    let start = Instant::now();
    let unit = corpus();
    let (mut auto, mut total, mut classes) = (0, 0, 0);
    let mut worst = f64::INFINITY;
    let mut shape_ok = true;
    for c in unit.classes.iter().filter(|c| !c.is_extern) {
        let methods = c.methods.iter().filter(|m| m.has_body).count();
        let deps = ultgen_core::list_dependencies(&unit, &c.name).map_err(|e| e.to_string())?.len();
        shape_ok &= (2..=8).contains(&methods) && deps <= 3;
        let b = generate_scaffold(&unit, &c.name).map_err(|e| e.to_string())?;
        worst = worst.min(measure_generation_ratio(&b));
        auto += b.auto_line_count;
        total += b.auto_line_count + b.anchor_line_count;
        classes += 1;
    }
    let ratio = auto as f64 / total as f64;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        classes >= 20 && shape_ok && ratio >= 0.8 && secs < 5.0,
        format!("{classes} classes, ratio {ratio:.3} (lowest class {worst:.3}), {secs:.2} s"),
    )
}

fn fuzz_coverage() -> Check {
    let start = Instant::now();
    let unit = corpus();
    let domains = corpus_domains();
    let (mut methods, mut at_max, mut low) = (0, 0, Vec::new());
    for t in method_targets(&unit, None, None) {
        if CoverageTarget::of(&t).conditions_total() > 6 {
            continue;
        }
        let d = domains
            .get(&t.class.name)
            .and_then(|m| m.get(&t.method.name))
            .ok_or_else(|| format!("no domains for {}", t.qualified_name()))?;
        let fuzzed = fuzz_candidates(&t, &t.decisions(), 256, 42, None).map_err(|e| e.to_string())?;
        let got = greedy_select(&t, fuzzed.cases, DEFAULT_FUEL).report.methods.remove(0);
        let max = brute_force_max_coverage(&t, d, DEFAULT_FUEL).map_err(|e| e.to_string())?.methods.remove(0);
        methods += 1;
        if got.percent < 70.0 {
            low.push(t.qualified_name());
        }
        if got.pairs_covered.len() >= max.pairs_covered.len() {
            at_max += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        methods > 0 && low.is_empty() && at_max * 100 >= methods * 95 && secs < 30.0,
        format!("{methods} methods, below 70%: {low:?}, at brute-force max {at_max}/{methods}, {secs:.2} s"),
    )
}

fn oracle_agreement() -> Check {
    let t = support::compare(42, 1000, 10);
    ensure(
        t.pairs == 10_000 && t.disagreements == 0,
        format!("{} pairs, {} disagreements, terminals {:?}", t.pairs, t.disagreements, t.kinds),
    )
}

fn planted_faults_found() -> Check {
    let unit = corpus();
    let faults = planted_faults();
    let opts = GenerateOptions {
        budget: 256,
        seed: 42,
        fuel: DEFAULT_FUEL,
    };
    let targets = method_targets(&unit, None, None);
    let generated = generate_cases(&targets, &CaseConfig::default(), opts).map_err(|e| e.to_string())?;
    let mut missed = Vec::new();
    for f in &faults {
        let found = generated.cases.iter().zip(&generated.traces).any(|(c, tr)| {
            c.class == f.class
                && c.method == f.method
                && tr.events.iter().any(|e| {
                    matches!(
                        (f.kind.as_str(), e),
                        ("DivByZero", Event::DivByZero { .. }) | ("AssertFailure", Event::AssertFailure { .. })
                    )
                })
        });
        if !found {
            missed.push(format!("{}.{}", f.class, f.method));
        }
    }
    ensure(
        !faults.is_empty() && missed.is_empty(),
        format!("{} planted, missed {missed:?}", faults.len()),
    )
}

fn hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, sha256_hex(&fs::read(&p).unwrap()));
            }
        }
    }
    out
}

fn run_determinism() -> Check {
    let project = fixtures().join("corpus");
    let mut results = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_ultgen"))
            .arg("run")
            .arg(&project)
            .arg("-o")
            .arg(out.path())
            .env_remove("ULTGEN_SEED")
            .output()
            .map_err(|e| e.to_string())?
            .status;
        results.push((status.code(), hashes(out.path())));
    }
    let files = results[0].1.len();
    ensure(
        results[0] == results[1] && files > 0 && results[0].0 == Some(0),
        format!("{files} files hashed, exit {:?}, identical {}", results[0].0, results[0] == results[1]),
    )
}

fn planted_advisor() -> Check {
    let start = Instant::now();
    let (trends, model) = planted_model(42);
    let probe = TrendPoint {
        period: "2019-01".parse().unwrap(),
        bug_count: 0,
        conditional_pct: 50.0,
        functional_pct: 100.0,
        churn_lines: 20,
    };
    let rec = recommend(&model, "probe", &probe, &RecommendOptions::default()).map_err(|e| e.to_string())?;
    let monotone = model.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-12);

    let samples = training_samples(&trends, corpus_churn_max(&trends));
    let (w, b) = ([0.3, -0.2, 0.7], -0.4);
    let (_, gw, gb) = loss_and_grad(&w, b, &samples, 1e-3);
    let h = 1e-6;
    let numeric: Vec<f64> = (0..4)
        .map(|j| {
            let at = |d: f64| {
                let mut w2 = w;
                let mut b2 = b;
                if j < 3 {
                    w2[j] += d;
                } else {
                    b2 += d;
                }
                loss_and_grad(&w2, b2, &samples, 1e-3).0
            };
            (at(h) - at(-h)) / (2.0 * h)
        })
        .collect();
    let analytic = [gw[0], gw[1], gw[2], gb];
    let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let norm = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let rel = diff / norm;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        model.weights.cov < 0.0 && rec.recommended_conditional_pct == 85.0 && rel <= 1e-4 && monotone && secs < 10.0,
        format!(
            "w_cov {:.3}, probe at coverage 50 gets {}, gradient rel. error {rel:.1e}, loss non-increasing {monotone}, {secs:.2} s",
            model.weights.cov, rec.recommended_conditional_pct
        ),
    )
}

fn recommendation_floor() -> Check {
    let mut all = Vec::new();
    let (trends, model) = planted_model(42);
    all.extend(recommend_all(&model, &trends, &RecommendOptions::default()).map_err(|e| e.to_string())?);
    for name in GAP_FIXTURES {
        all.extend(gap_fixture(name).recommendations());
    }
    // Random models, including ones where coverage does not help.
    let mut rng = SplitMix64::new(42);
    let mut signed = |scale: f64| (rng.unit_f64() * 2.0 - 1.0) * scale;
    for _ in 0..10_000 {
        let w = [signed(20.0), signed(5.0), signed(5.0).abs()];
        let b = signed(10.0);
        let m = ModelParams {
            weights: Weights { cov: w[0], churn: w[1], prior: w[2] },
            bias: b,
            std_weights: w,
            std_bias: b,
            feature_mean: [0.0; 3],
            feature_scale: [1.0; 3],
            churn_max: 100.0,
            zero_bug_median: if signed(1.0) > 0.0 { Some(signed(50.0) + 50.0) } else { None },
            samples: 100,
            options: TrainOptions::default(),
            loss_history: vec![0.5],
        };
        let point = TrendPoint {
            period: "2020-01".parse().unwrap(),
            bug_count: (signed(5.0).abs()) as u32,
            conditional_pct: signed(50.0) + 50.0,
            functional_pct: 100.0,
            churn_lines: (signed(100.0).abs()) as u64,
        };
        let tau = 0.05 + signed(0.45).abs();
        all.push(recommend(&m, "r", &point, &RecommendOptions { tau, ..RecommendOptions::default() }).map_err(|e| e.to_string())?);
    }
    // The fixture project's advice as written by the CLI.
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    Command::new(env!("CARGO_BIN_EXE_ultgen"))
        .arg("run")
        .arg(fixtures().join("corpus"))
        .arg("-o")
        .arg(out.path())
        .output()
        .map_err(|e| e.to_string())?;
    let advice: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("advice.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let from_cli: Vec<f64> = advice["recommendations"]
        .as_array()
        .ok_or("advice.json has no recommendations")?
        .iter()
        .filter_map(|r| r["recommended_conditional_pct"].as_f64())
        .collect();
    let lowest = all
        .iter()
        .map(|r| r.recommended_conditional_pct)
        .chain(from_cli.iter().copied())
        .fold(f64::INFINITY, f64::min);
    ensure(
        lowest >= 70.0,
        format!("{} recommendations, lowest {lowest}", all.len() + from_cli.len()),
    )
}

fn gap_reports() -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    for name in GAP_FIXTURES {
        let f = gap_fixture(name);
        let recs = f.recommendations();
        let report = gap_report(&recs);
        let got: Vec<(String, f64)> = report.gaps.iter().map(|g| (g.component.clone(), g.gap)).collect();
        let want: Vec<(String, f64)> = f.expected.iter().map(|e| (e.component.clone(), e.gap)).collect();
        // Independent of the fixture: exactly the rows with recommended > current + 1.
        let rule = recs
            .iter()
            .filter(|r| r.recommended_conditional_pct > r.current_conditional_pct + 1.0)
            .count();
        let sorted = report.gaps.windows(2).all(|w| w[0].gap >= w[1].gap);
        ok &= got == want && rule == got.len() && sorted;
        details.push(format!("{name}: {} rows", got.len()));
    }
    ensure(ok, details.join(", "))
}

fn main() {
    let checks: [Criterion; 9] = [
        ("golden scaffold for A and C", golden_scaffold),
        ("generation ratio over the corpus", generation_ratio),
        ("fuzzing reaches 70% and the brute-force maximum", fuzz_coverage),
        ("evaluator agrees with the oracle", oracle_agreement),
        ("planted faults found", planted_faults_found),
        ("run is reproducible", run_determinism),
        ("advisor recovers the planted model", planted_advisor),
        ("no recommendation below 70", recommendation_floor),
        ("gap report fixtures", gap_reports),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
