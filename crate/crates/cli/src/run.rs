//! `ultgen run`: advise, scaffold, generate cases, measure coverage and
//! report gaps for a project directory, recording everything in a manifest.
//!
//! Project layout:
//!
//! ```text
//! <project>/src/**/*.cut     sources (required)
//! <project>/cases.json       case configuration (optional)
//! <project>/history/         bugs.jsonl, commits.jsonl, coverage.jsonl,
//!                            components.json (optional, all or none)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use ultgen_core::advisor::{gap_report, GapRow, RecommendOptions};
use ultgen_core::cases::{generate_cases, load_case_config, method_targets, to_jsonl, CaseConfig, GenerateOptions, Origin};
use ultgen_core::fingerprint::sha256_hex;
use ultgen_core::scaffold::generate_scaffold;

use crate::advise::{advise, AdviceInputs};
use crate::source;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub generate: GenerateOptions,
    pub recommend: RecommendOptions,
    /// Conditional coverage every class must reach when no recommendation
    /// names it.
    pub threshold: f64,
}

#[derive(Debug, Serialize)]
pub struct InputFingerprint {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Default, Serialize)]
pub struct AdviseStage {
    pub ran: bool,
    pub output: Option<String>,
    pub coverage_helps: Option<bool>,
    pub components: usize,
}

#[derive(Debug, Default, Serialize)]
pub struct ScaffoldStage {
    pub outputs: Vec<String>,
    pub classes: usize,
    pub auto_lines: usize,
    pub anchor_lines: usize,
    pub generation_ratio: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct CasesStage {
    pub output: Option<String>,
    pub methods: usize,
    pub configured: usize,
    pub fuzzed: usize,
    pub findings: usize,
}

#[derive(Debug, Default, Serialize)]
pub struct CoverageStage {
    pub output: Option<String>,
    pub conditional_pct: f64,
    pub functional_pct: f64,
    /// Per class: measured conditional coverage and the target it is held to.
    pub classes: BTreeMap<String, ClassTarget>,
}

#[derive(Debug, Serialize)]
pub struct ClassTarget {
    pub conditional_pct: f64,
    pub target_pct: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub inputs: Vec<InputFingerprint>,
    pub seed: u64,
    pub budget: usize,
    pub fuel: u64,
    pub tau: f64,
    pub threshold: f64,
    pub advise: AdviseStage,
    pub scaffold: ScaffoldStage,
    pub cases: CasesStage,
    pub coverage: CoverageStage,
    pub gaps: Vec<GapRow>,
    pub errors: Vec<StageError>,
    pub exit_code: i32,
}

fn write(out: &Path, rel: &str, text: &str) -> Result<String> {
    let path = out.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(rel.to_string())
}

fn fingerprint(project: &Path, rel: &str) -> Result<InputFingerprint> {
    let bytes = fs::read(project.join(rel)).with_context(|| format!("reading {rel}"))?;
    Ok(InputFingerprint {
        path: rel.to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Runs every stage it can. Errors are recorded with the stage they came
/// from; later stages that depend on a failed one are skipped. The manifest
/// is always written.
pub fn run(project: &Path, out: &Path, options: &RunOptions) -> Result<RunManifest> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut m = RunManifest {
        tool: "ultgen",
        version: env!("CARGO_PKG_VERSION"),
        inputs: Vec::new(),
        seed: options.generate.seed,
        budget: options.generate.budget,
        fuel: options.generate.fuel,
        tau: options.recommend.tau,
        threshold: options.threshold,
        advise: AdviseStage::default(),
        scaffold: ScaffoldStage::default(),
        cases: CasesStage::default(),
        coverage: CoverageStage::default(),
        gaps: Vec::new(),
        errors: Vec::new(),
        exit_code: 0,
    };
    stages(project, out, options, &mut m);
    m.exit_code = if !m.errors.is_empty() {
        1
    } else if !m.gaps.is_empty() {
        2
    } else {
        0
    };
    write(out, MANIFEST_FILE, &json(&m))?;
    Ok(m)
}

fn fail(m: &mut RunManifest, stage: &'static str, e: anyhow::Error) {
    m.errors.push(StageError {
        stage,
        message: format!("{e:#}"),
    })
}

fn stages(project: &Path, out: &Path, options: &RunOptions, m: &mut RunManifest) {
    // advise
    let history = project.join("history");
    let mut advice = None;
    if history.is_dir() {
        let inputs = AdviceInputs::in_dir(&history);
        for p in inputs.paths() {
            let rel = format!("history/{}", p.file_name().expect("file").to_string_lossy());
            match fingerprint(project, &rel) {
                Ok(f) => m.inputs.push(f),
                Err(e) => fail(m, "advise", e),
            }
        }
        match advise(&inputs, &options.recommend) {
            Ok(a) => {
                m.advise.ran = true;
                m.advise.coverage_helps = Some(a.model.coverage_helps);
                m.advise.components = a.recommendations.len();
                match write(out, "advice.json", &json(&a)) {
                    Ok(p) => m.advise.output = Some(p),
                    Err(e) => fail(m, "advise", e),
                }
                advice = Some(a);
            }
            Err(e) => fail(m, "advise", e),
        }
    }

    // sources
    let src = project.join("src");
    let sources = match source::load(&src) {
        Ok(s) => s,
        Err(e) => return fail(m, "parse", e),
    };
    for f in &sources.files {
        m.inputs.push(InputFingerprint {
            path: format!("src/{}", f.name),
            sha256: sha256_hex(f.text.as_bytes()),
        });
    }
    let unit = &sources.unit;

    // scaffold
    let mut auto = 0;
    let mut total = 0;
    for class in unit.classes.iter().filter(|c| !c.is_extern) {
        match generate_scaffold(unit, &class.name) {
            Ok(bundle) => {
                auto += bundle.auto_line_count;
                total += bundle.auto_line_count + bundle.anchor_line_count;
                m.scaffold.classes += 1;
                for file in bundle.files() {
                    match write(out, &format!("scaffold/{}/{}", class.name, file.name), &file.text) {
                        Ok(p) => m.scaffold.outputs.push(p),
                        Err(e) => fail(m, "scaffold", e),
                    }
                }
            }
            Err(e) => fail(m, "scaffold", e.into()),
        }
    }
    m.scaffold.auto_lines = auto;
    m.scaffold.anchor_lines = total - auto;
    m.scaffold.generation_ratio = if total == 0 { 1.0 } else { auto as f64 / total as f64 };

    // cases
    let config_path = project.join("cases.json");
    let config = if config_path.is_file() {
        let loaded = fingerprint(project, "cases.json").and_then(|f| {
            m.inputs.push(f);
            let text = fs::read_to_string(&config_path)?;
            load_case_config(&text, unit).map_err(anyhow::Error::from)
        });
        match loaded {
            Ok(c) => c,
            Err(e) => return fail(m, "cases", e.context("cases.json")),
        }
    } else {
        CaseConfig::default()
    };
    let targets = method_targets(unit, None, None);
    let generated = match generate_cases(&targets, &config, options.generate) {
        Ok(g) => g,
        Err(e) => return fail(m, "cases", e.into()),
    };
    m.cases.methods = targets.len();
    m.cases.configured = generated.count(Origin::Configured);
    m.cases.fuzzed = generated.count(Origin::Fuzzed);
    m.cases.findings = generated.report.methods.iter().map(|mc| mc.findings.len()).sum();
    match write(out, "cases.jsonl", &to_jsonl(&generated.cases)) {
        Ok(p) => m.cases.output = Some(p),
        Err(e) => fail(m, "cases", e),
    }

    // coverage
    let report = &generated.report;
    m.coverage.conditional_pct = report.overall.conditional_pct;
    m.coverage.functional_pct = report.overall.functional_pct;
    match write(out, "coverage.json", &json(report)) {
        Ok(p) => m.coverage.output = Some(p),
        Err(e) => fail(m, "coverage", e),
    }

    // gaps: refresh recommendations with the coverage just measured
    let measured: Vec<(String, f64)> = report
        .components
        .iter()
        .map(|r| (r.component.clone(), r.conditional_pct))
        .collect();
    let recs = match &advice {
        Some(a) => match a.with_measured(&measured, &options.recommend) {
            Ok(r) => r,
            Err(e) => return fail(m, "gap_report", e),
        },
        None => Vec::new(),
    };
    let mut gaps = gap_report(&recs).gaps;
    for (class, pct) in &measured {
        let target = recs
            .iter()
            .find(|r| &r.component == class)
            .map_or(options.threshold, |r| r.recommended_conditional_pct);
        m.coverage.classes.insert(
            class.clone(),
            ClassTarget {
                conditional_pct: *pct,
                target_pct: target,
            },
        );
        if *pct < target && !gaps.iter().any(|g| &g.component == class) {
            gaps.push(GapRow {
                component: class.clone(),
                current_conditional_pct: *pct,
                recommended_conditional_pct: target,
                gap: target - pct,
            });
        }
    }
    gaps.sort_by(|a, b| b.gap.total_cmp(&a.gap).then_with(|| a.component.cmp(&b.component)));
    m.gaps = gaps;
}

impl RunManifest {
    /// Stage summary for the terminal; errors are left to the caller.
    pub fn to_text(&self, out: &Path) -> String {
        let mut s = String::new();
        if self.advise.ran {
            s.push_str(&format!("advise: {} components\n", self.advise.components));
        }
        s.push_str(&format!(
            "scaffold: {} classes, generation ratio {:.3}\n",
            self.scaffold.classes, self.scaffold.generation_ratio
        ));
        s.push_str(&format!(
            "cases: {} methods, {} configured, {} fuzzed, {} findings\n",
            self.cases.methods, self.cases.configured, self.cases.fuzzed, self.cases.findings
        ));
        s.push_str(&format!(
            "coverage: conditional {:.1}%, functional {:.1}%\n",
            self.coverage.conditional_pct, self.coverage.functional_pct
        ));
        for g in &self.gaps {
            s.push_str(&format!(
                "gap: {} at {:.1}, target {:.1}\n",
                g.component, g.current_conditional_pct, g.recommended_conditional_pct
            ));
        }
        s.push_str(&format!("manifest: {}\n", PathBuf::from(out).join(MANIFEST_FILE).display()));
        s
    }
}
