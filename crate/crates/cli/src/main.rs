mod advise;
mod run;
mod source;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use ultgen_core::advisor::RecommendOptions;
use ultgen_core::cases::{
    generate_cases, load_case_config, method_targets, read_jsonl, write_jsonl, CaseConfig, GenerateOptions, Origin,
};
use ultgen_core::decision::DecisionTable;
use ultgen_core::exec::coverage::{compute_coverage, CoverageTarget};
use ultgen_core::exec::{evaluate_case, CoverageReport, MethodTarget, DEFAULT_FUEL};
use ultgen_core::scaffold::{generate_scaffold, merge_bundle, ScaffoldBundle};

use crate::advise::{advise, AdviceInputs};
use crate::run::RunOptions;

#[derive(Parser)]
#[command(name = "ultgen", version, about = "Unit-level test scaffolding, case generation and coverage advice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate fixture, test-class and mock files for a class.
    Scaffold(ScaffoldArgs),
    /// Print the decision and condition table of a method.
    Decisions(DecisionsArgs),
    /// Generate configured and fuzzed test cases.
    Cases(CasesArgs),
    /// Execute a case file and report condition/decision coverage.
    Coverage(CoverageArgs),
    /// Recommend per-component coverage targets from bug history.
    Advise(AdviseArgs),
    /// Run advise, scaffold, cases and coverage on a project directory.
    Run(RunArgs),
}

#[derive(Args)]
struct ScaffoldArgs {
    /// A .cut file or a directory of them.
    src: PathBuf,
    /// Class to scaffold; every non-extern class when omitted.
    #[arg(long)]
    class: Option<String>,
    #[arg(short, long)]
    out: PathBuf,
    /// Keep the text inside anchor regions of files already in the output.
    #[arg(long)]
    merge: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecisionsArgs {
    src: PathBuf,
    #[arg(long)]
    class: String,
    /// Method to list; every method of the class when omitted.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CasesArgs {
    src: PathBuf,
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 256)]
    budget: usize,
    #[arg(long, env = "ULTGEN_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Case configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output case file (JSONL).
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CoverageArgs {
    src: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    #[arg(long, default_value_t = 70.0)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long, required_unless_present = "watch")]
    bugs: Option<PathBuf>,
    #[arg(long, required_unless_present = "watch")]
    commits: Option<PathBuf>,
    #[arg(long, required_unless_present = "watch")]
    coverage: Option<PathBuf>,
    #[arg(long, required_unless_present = "watch")]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    tau: f64,
    #[arg(long)]
    json: bool,
    /// Re-run whenever an input changes. Inputs not given explicitly are
    /// taken from this directory (bugs.jsonl, commits.jsonl, coverage.jsonl,
    /// components.json).
    #[arg(long)]
    watch: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, hide = true)]
    poll_ms: u64,
    /// Stop watching after this many runs.
    #[arg(long, hide = true)]
    max_runs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Project directory (src/, optional cases.json and history/).
    project: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 256)]
    budget: usize,
    #[arg(long, env = "ULTGEN_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long, default_value_t = 0.3)]
    tau: f64,
    #[arg(long, default_value_t = 70.0)]
    threshold: f64,
    #[arg(long)]
    json: bool,
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (`ultgen ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scaffold(a) => scaffold(a),
        Command::Decisions(a) => decisions(a),
        Command::Cases(a) => cases(a),
        Command::Coverage(a) => coverage(a),
        Command::Advise(a) => advise_cmd(a),
        Command::Run(a) => run_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct ScaffoldSummary<'a> {
    files: Vec<String>,
    bundles: &'a [ScaffoldBundle],
}

fn scaffold(a: ScaffoldArgs) -> Result<u8> {
    let sources = source::load(&a.src)?;
    let unit = &sources.unit;
    let classes: Vec<String> = match &a.class {
        Some(c) => vec![c.clone()],
        None => unit.classes.iter().filter(|c| !c.is_extern).map(|c| c.name.clone()).collect(),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut bundles = Vec::new();
    let mut written = Vec::new();
    for class in &classes {
        let mut bundle = generate_scaffold(unit, class)?;
        if a.merge {
            let mut existing = BTreeMap::new();
            for f in bundle.files() {
                let path = a.out.join(&f.name);
                if path.is_file() {
                    existing.insert(f.name.clone(), fs::read_to_string(&path)?);
                }
            }
            bundle = merge_bundle(bundle, &existing);
        }
        for f in bundle.files() {
            let path = a.out.join(&f.name);
            fs::write(&path, &f.text).with_context(|| format!("writing {}", path.display()))?;
            written.push(path.display().to_string());
        }
        for w in &bundle.warnings {
            eprintln!("warning: {class}: {w}");
        }
        bundles.push(bundle);
    }
    if a.json {
        print_json(&ScaffoldSummary {
            files: written,
            bundles: &bundles,
        });
    } else {
        for b in &bundles {
            let total = b.auto_line_count + b.anchor_line_count;
            println!(
                "{}: {} files, {} lines ({} generated, {} in anchors)",
                b.class,
                b.files().count(),
                total,
                b.auto_line_count,
                b.anchor_line_count
            );
        }
        for w in &written {
            println!("  {w}");
        }
    }
    Ok(0)
}

fn decisions(a: DecisionsArgs) -> Result<u8> {
    let sources = source::load(&a.src)?;
    match &a.method {
        Some(m) => drop(MethodTarget::new(&sources.unit, &a.class, m)?),
        None if sources.unit.class(&a.class).is_none() => bail!("unknown class `{}`", a.class),
        None => {}
    }
    let targets = method_targets(&sources.unit, Some(&a.class), a.method.as_deref());
    if targets.is_empty() {
        bail!("no method bodies to analyse in `{}`", a.class);
    }
    let tables: Vec<DecisionTable> = targets
        .iter()
        .map(|t| DecisionTable::new(&t.class.name, &t.method.name, &t.decisions()))
        .collect();
    if a.json {
        if a.method.is_some() {
            print_json(&tables[0]);
        } else {
            print_json(&tables);
        }
        return Ok(0);
    }
    for t in &tables {
        println!("{}.{}: {} decisions", t.class, t.method, t.decisions.len());
        for d in &t.decisions {
            println!("  D{} {:?} at {}:{}  {}", d.ordinal, d.kind, d.line, d.column, d.expr);
            for c in &d.conditions {
                println!("    C{}.{} {:?}  {}", d.ordinal, c.index, c.driver, c.atom);
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CasesSummary<'a> {
    output: String,
    configured: usize,
    fuzzed: usize,
    diagnostics: &'a [ultgen_core::cases::Diagnostic],
    coverage: &'a CoverageReport,
}

fn cases(a: CasesArgs) -> Result<u8> {
    let sources = source::load(&a.src)?;
    let unit = &sources.unit;
    let config = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            load_case_config(&text, unit).with_context(|| p.display().to_string())?
        }
        None => CaseConfig::default(),
    };
    if let Some(c) = &a.class {
        match &a.method {
            Some(m) => drop(MethodTarget::new(unit, c, m)?),
            None if unit.class(c).is_none() => bail!("unknown class `{c}`"),
            None => {}
        }
    }
    let targets = method_targets(unit, a.class.as_deref(), a.method.as_deref());
    let generated = generate_cases(
        &targets,
        &config,
        GenerateOptions {
            budget: a.budget,
            seed: a.seed,
            fuel: a.fuel,
        },
    )?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = fs::File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    write_jsonl(std::io::BufWriter::new(file), &generated.cases)?;
    for d in &generated.diagnostics {
        eprintln!("note: {}: default value filled for `{}`", d.case, d.target);
    }
    if a.json {
        print_json(&CasesSummary {
            output: a.out.display().to_string(),
            configured: generated.count(Origin::Configured),
            fuzzed: generated.count(Origin::Fuzzed),
            diagnostics: &generated.diagnostics,
            coverage: &generated.report,
        });
    } else {
        println!(
            "{} cases ({} configured, {} fuzzed) written to {}",
            generated.cases.len(),
            generated.count(Origin::Configured),
            generated.count(Origin::Fuzzed),
            a.out.display()
        );
        print_coverage(&generated.report);
    }
    Ok(0)
}

fn print_coverage(report: &CoverageReport) {
    for m in &report.methods {
        println!(
            "  {}.{}: {:.1}% ({}/{} pairs), {} cases, {} findings",
            m.class,
            m.method,
            m.percent,
            m.pairs_covered.len(),
            m.pairs_total,
            m.cases,
            m.findings.len()
        );
        for f in &m.findings {
            println!("    {}: {:?}", f.case_id, f.event);
        }
    }
    println!(
        "conditional coverage {:.1}%, functional coverage {:.1}%",
        report.overall.conditional_pct, report.overall.functional_pct
    );
}

fn coverage(a: CoverageArgs) -> Result<u8> {
    let sources = source::load(&a.src)?;
    let unit = &sources.unit;
    let file = fs::File::open(&a.cases).with_context(|| format!("reading {}", a.cases.display()))?;
    let cases = read_jsonl(std::io::BufReader::new(file)).with_context(|| a.cases.display().to_string())?;

    // Targets are the methods the case file exercises, in first-seen order.
    let mut names: Vec<(&str, &str)> = Vec::new();
    for c in &cases {
        if !names.contains(&(c.class.as_str(), c.method.as_str())) {
            names.push((&c.class, &c.method));
        }
    }
    let targets: Vec<MethodTarget> = names
        .iter()
        .map(|(c, m)| MethodTarget::new(unit, c, m))
        .collect::<Result<_, _>>()?;
    let mut traces = Vec::new();
    for case in &cases {
        let target = targets
            .iter()
            .find(|t| t.class.name == case.class && t.method.name == case.method)
            .expect("collected above");
        traces.push(evaluate_case(target, case, a.fuel)?);
    }
    let cov_targets: Vec<CoverageTarget> = targets.iter().map(CoverageTarget::of).collect();
    let report = compute_coverage(&traces, &cov_targets)?;
    if a.json {
        print_json(&report);
    } else {
        print_coverage(&report);
    }
    Ok(if report.overall.conditional_pct < a.threshold { 1 } else { 0 })
}

fn advise_inputs(a: &AdviseArgs) -> AdviceInputs {
    let base = a.watch.as_deref().map(AdviceInputs::in_dir);
    let pick = |given: &Option<PathBuf>, dflt: fn(&AdviceInputs) -> &PathBuf| -> PathBuf {
        given
            .clone()
            .or_else(|| base.as_ref().map(|b| dflt(b).clone()))
            .expect("clap requires the flag without --watch")
    };
    AdviceInputs {
        bugs: pick(&a.bugs, |b| &b.bugs),
        commits: pick(&a.commits, |b| &b.commits),
        coverage: pick(&a.coverage, |b| &b.coverage),
        map: pick(&a.map, |b| &b.map),
    }
}

fn advise_once(inputs: &AdviceInputs, options: &RecommendOptions, json: bool) -> Result<u8> {
    let advice = advise(inputs, options)?;
    for w in &advice.warnings {
        eprintln!("warning: {w}");
    }
    if json {
        print_json(&advice);
    } else {
        print!("{}", advice.to_text());
    }
    Ok(advice.gaps.exit_code() as u8)
}

fn stamp(paths: &[&PathBuf]) -> Vec<Option<(SystemTime, u64)>> {
    paths
        .iter()
        .map(|p| fs::metadata(p).ok().and_then(|m| Some((m.modified().ok()?, m.len()))))
        .collect()
}

fn advise_cmd(a: AdviseArgs) -> Result<u8> {
    let inputs = advise_inputs(&a);
    let options = RecommendOptions {
        tau: a.tau,
        ..RecommendOptions::default()
    };
    if a.watch.is_none() {
        return advise_once(&inputs, &options, a.json);
    }
    let mut runs = 0;
    let mut last_stamp = None;
    loop {
        let now = stamp(&inputs.paths());
        if last_stamp.as_ref() != Some(&now) {
            last_stamp = Some(now);
            let code = match advise_once(&inputs, &options, a.json) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    1
                }
            };
            runs += 1;
            if a.max_runs.is_some_and(|m| runs >= m) {
                return Ok(code);
            }
        }
        std::thread::sleep(Duration::from_millis(a.poll_ms));
    }
}

fn run_cmd(a: RunArgs) -> Result<u8> {
    if !Path::new(&a.project).join("src").is_dir() {
        bail!("no classes found: {} has no src/ directory", a.project.display());
    }
    let manifest = run::run(
        &a.project,
        &a.out,
        &RunOptions {
            generate: GenerateOptions {
                budget: a.budget,
                seed: a.seed,
                fuel: a.fuel,
            },
            recommend: RecommendOptions {
                tau: a.tau,
                ..RecommendOptions::default()
            },
            threshold: a.threshold,
        },
    )?;
    if a.json {
        print_json(&manifest);
    } else {
        print!("{}", manifest.to_text(&a.out));
    }
    for e in &manifest.errors {
        eprintln!("error [{}]: {}", e.stage, e.message);
    }
    Ok(manifest.exit_code as u8)
}
