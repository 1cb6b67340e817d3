//! Fixture, test-class and mock-class text for a class under test.
//!
//! Output layout for class `A` with dependency `C`:
//!
//! * `A_test_fixture.cpp`: `A_TestCase`, its `SetUp`/`TearDown` and one
//!   `TEST_F` per method of `A`
//! * `test_A.h`: `Test_A : public A` with one `<m>Test()` per method and
//!   the constructor that installs the mocks
//! * `mock_C.h`: `MOCK_C : public C` with a setter per field and a scripted
//!   return per value-returning method
//!
//! Hand-written code belongs between `// ULTGEN-ANCHOR: <kind>` and
//! `// ULTGEN-END`; [`merge_bundle`] carries those regions over into a
//! regenerated bundle.

mod syntax;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{ClassDecl, FieldType, MethodDecl, ScalarType, SourceUnit};

pub use syntax::check_syntax;

pub const ANCHOR_PREFIX: &str = "// ULTGEN-ANCHOR: ";
pub const ANCHOR_END: &str = "// ULTGEN-END";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AnchorKind {
    SetUpBody,
    TearDownBody,
    TestBody(String),
}

impl fmt::Display for AnchorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorKind::SetUpBody => f.write_str("SetUpBody"),
            AnchorKind::TearDownBody => f.write_str("TearDownBody"),
            AnchorKind::TestBody(m) => write!(f, "TestBody({m})"),
        }
    }
}

impl std::str::FromStr for AnchorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SetUpBody" => Ok(AnchorKind::SetUpBody),
            "TearDownBody" => Ok(AnchorKind::TearDownBody),
            _ => s
                .strip_prefix("TestBody(")
                .and_then(|r| r.strip_suffix(')'))
                .filter(|m| !m.is_empty())
                .map(|m| AnchorKind::TestBody(m.to_string()))
                .ok_or_else(|| format!("unknown anchor kind `{s}`")),
        }
    }
}

/// Position of an anchor marker (1-based line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub file: String,
    pub line: usize,
    pub kind: AnchorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedFile {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ScaffoldWarning {
    /// The mock only knows the surface the `extern` declaration lists.
    ExternDependency { dependency: String, surface: bool },
    /// A hand-edited region whose anchor no longer exists was dropped.
    DroppedRegion { file: String, anchor: String },
}

impl fmt::Display for ScaffoldWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaffoldWarning::ExternDependency { dependency, surface: true } => {
                write!(f, "MOCK_{dependency} covers only the members its extern declaration lists")
            }
            ScaffoldWarning::ExternDependency { dependency, surface: false } => {
                write!(f, "MOCK_{dependency} is empty: `{dependency}` is extern without members")
            }
            ScaffoldWarning::DroppedRegion { file, anchor } => {
                write!(f, "{file}: edited region `{anchor}` has no anchor any more and was dropped")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScaffoldBundle {
    pub class: String,
    pub fixture: GeneratedFile,
    pub test_class: GeneratedFile,
    /// Keyed by dependency class name.
    pub mocks: BTreeMap<String, GeneratedFile>,
    pub anchors: Vec<Anchor>,
    pub auto_line_count: usize,
    pub anchor_line_count: usize,
    pub warnings: Vec<ScaffoldWarning>,
}

impl ScaffoldBundle {
    fn assemble(
        class: String,
        fixture: GeneratedFile,
        test_class: GeneratedFile,
        mocks: BTreeMap<String, GeneratedFile>,
        warnings: Vec<ScaffoldWarning>,
    ) -> Self {
        let mut bundle = ScaffoldBundle {
            class,
            fixture,
            test_class,
            mocks,
            anchors: Vec::new(),
            auto_line_count: 0,
            anchor_line_count: 0,
            warnings,
        };
        let mut anchors = Vec::new();
        let mut total = 0;
        let mut anchored = 0;
        for file in bundle.files() {
            let scan = scan_regions(&file.text);
            total += file.text.lines().count();
            anchored += scan.iter().map(|r| r.end - r.start + 1).sum::<usize>();
            anchors.extend(scan.into_iter().map(|r| Anchor {
                file: file.name.clone(),
                line: r.start + 1,
                kind: r.kind,
            }));
        }
        bundle.anchors = anchors;
        bundle.auto_line_count = total - anchored;
        bundle.anchor_line_count = anchored;
        bundle
    }

    /// Fixture, test class, then mocks by dependency name.
    pub fn files(&self) -> impl Iterator<Item = &GeneratedFile> {
        [&self.fixture, &self.test_class].into_iter().chain(self.mocks.values())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaffoldError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("`{0}` is extern and has no body to test")]
    ExternClass(String),
}

pub fn fixture_file_name(class: &str) -> String {
    format!("{class}_test_fixture.cpp")
}

pub fn test_file_name(class: &str) -> String {
    format!("test_{class}.h")
}

pub fn mock_file_name(dep: &str) -> String {
    format!("mock_{dep}.h")
}

/// `variable1` → `Variable1`.
fn capitalize(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn banner(class: &str) -> String {
    format!("// Generated by ultgen for class {class}. Edit only inside ULTGEN-ANCHOR regions.")
}

fn field_type_text(ty: &FieldType) -> String {
    match ty {
        FieldType::Scalar(t) => t.keyword().to_string(),
        FieldType::Ref(c) => format!("{c}*"),
    }
}

fn scripted_type(ty: ScalarType) -> &'static str {
    match ty {
        ScalarType::Int => "ULT_ScriptedInt",
        ScalarType::Bool => "ULT_ScriptedBool",
        ScalarType::Float => "ULT_ScriptedFloat",
    }
}

/// Classes from the root of the inheritance chain down to `class`.
fn chain<'a>(unit: &'a SourceUnit, class: &'a ClassDecl) -> Vec<&'a ClassDecl> {
    let mut out = vec![class];
    let mut cur = class;
    while let Some(base) = cur.base.as_deref().and_then(|b| unit.class(b)) {
        if out.iter().any(|c| c.name == base.name) {
            break;
        }
        out.push(base);
        cur = base;
    }
    out.reverse();
    out
}

/// Methods visible on `class`: inherited first, overrides keep the base slot.
fn visible_methods<'a>(unit: &'a SourceUnit, class: &'a ClassDecl) -> Vec<&'a MethodDecl> {
    let mut out: Vec<&MethodDecl> = Vec::new();
    for c in chain(unit, class) {
        for m in &c.methods {
            match out.iter_mut().find(|o| o.name == m.name) {
                Some(slot) => *slot = m,
                None => out.push(m),
            }
        }
    }
    out
}

struct Lines(Vec<String>);

impl Lines {
    fn push(&mut self, line: impl Into<String>) {
        self.0.push(line.into());
    }

    fn anchor(&mut self, indent: &str, kind: &AnchorKind) {
        self.push(format!("{indent}{ANCHOR_PREFIX}{kind}"));
        self.push(format!("{indent}{ANCHOR_END}"));
    }

    fn finish(self) -> String {
        let mut text = self.0.join("\n");
        text.push('\n');
        text
    }
}

/// Builds the scaffold for `class`. Output depends only on the unit.
pub fn generate_scaffold(unit: &SourceUnit, class: &str) -> Result<ScaffoldBundle, ScaffoldError> {
    let decl = unit
        .class(class)
        .ok_or_else(|| ScaffoldError::UnknownClass(class.to_string()))?;
    if decl.is_extern {
        return Err(ScaffoldError::ExternClass(class.to_string()));
    }
    let fixture = fixture_text(decl);
    let test_class = test_class_text(unit, decl);

    let mut mocks = BTreeMap::new();
    let mut warnings = Vec::new();
    for dep in &decl.dependencies {
        let Some(dep_decl) = unit.class(&dep.class) else { continue };
        if dep_decl.is_extern {
            warnings.push(ScaffoldWarning::ExternDependency {
                dependency: dep.class.clone(),
                surface: dep_decl.has_surface,
            });
        }
        mocks.insert(
            dep.class.clone(),
            GeneratedFile {
                name: mock_file_name(&dep.class),
                text: mock_text(unit, dep_decl, class),
            },
        );
    }
    Ok(ScaffoldBundle::assemble(
        class.to_string(),
        GeneratedFile {
            name: fixture_file_name(class),
            text: fixture,
        },
        GeneratedFile {
            name: test_file_name(class),
            text: test_class,
        },
        mocks,
        warnings,
    ))
}

fn fixture_text(decl: &ClassDecl) -> String {
    let a = &decl.name;
    let var = format!("test{a}");
    let mut out = Lines(Vec::new());
    out.push(banner(a));
    out.push(format!("#include \"{}\"", test_file_name(a)));
    out.push("");
    out.push(format!("class {a}_TestCase : public testing::Test"));
    out.push("{");
    out.push("public:");
    out.push("    virtual void SetUp();");
    out.push("    virtual void TearDown();");
    out.push(format!("    Test_{a} *{var};"));
    out.push("};");
    out.push("");
    out.push(format!("void {a}_TestCase::SetUp()"));
    out.push("{");
    out.push(format!("    {var} = new Test_{a}();"));
    out.anchor("    ", &AnchorKind::SetUpBody);
    out.push("}");
    out.push("");
    out.push(format!("void {a}_TestCase::TearDown()"));
    out.push("{");
    out.anchor("    ", &AnchorKind::TearDownBody);
    out.push(format!("    delete {var};"));
    out.push("}");
    for m in &decl.methods {
        out.push("");
        out.push(format!("TEST_F({a}_TestCase, {})", m.name));
        out.push("{");
        out.push(format!("    {var}->{}Test();", m.name));
        out.push("}");
    }
    out.finish()
}

fn test_class_text(unit: &SourceUnit, decl: &ClassDecl) -> String {
    let a = &decl.name;
    // Reference fields visible in A, with the class each one points at.
    let refs: Vec<(&str, &str)> = chain(unit, decl)
        .into_iter()
        .flat_map(|c| &c.fields)
        .filter_map(|f| match &f.ty {
            FieldType::Ref(dep) => Some((f.name.as_str(), dep.as_str())),
            FieldType::Scalar(_) => None,
        })
        .collect();

    let mut out = Lines(Vec::new());
    out.push(banner(a));
    out.push("#pragma once");
    for dep in &decl.dependencies {
        out.push(format!("#include \"{}\"", mock_file_name(&dep.class)));
    }
    out.push("");
    out.push(format!("class Test_{a} : public {a}"));
    out.push("{");
    out.push("public:");
    out.push(format!("    Test_{a}();"));
    for m in &decl.methods {
        out.push(format!("    void {}Test();", m.name));
    }
    for (field, dep) in &refs {
        out.push(format!("    MOCK_{dep} *mock_{field};"));
    }
    out.push("};");
    out.push("");
    out.push(format!("inline Test_{a}::Test_{a}()"));
    out.push("{");
    for (field, dep) in &refs {
        out.push(format!("    mock_{field} = new MOCK_{dep}();"));
        out.push(format!("    {field} = mock_{field};"));
    }
    out.push("}");
    for m in &decl.methods {
        out.push("");
        out.push(format!("inline void Test_{a}::{}Test()", m.name));
        out.push("{");
        out.anchor("    ", &AnchorKind::TestBody(m.name.clone()));
        out.push("}");
    }
    out.finish()
}

fn mock_text(unit: &SourceUnit, dep: &ClassDecl, for_class: &str) -> String {
    let c = &dep.name;
    let fields: Vec<_> = chain(unit, dep).into_iter().flat_map(|d| &d.fields).collect();
    let scripted: Vec<(&str, ScalarType)> = visible_methods(unit, dep)
        .into_iter()
        .filter_map(|m| m.return_type.map(|t| (m.name.as_str(), t)))
        .collect();

    let mut out = Lines(Vec::new());
    out.push(banner(for_class));
    out.push("#pragma once");
    out.push("");
    out.push(format!("class MOCK_{c} : public {c}"));
    out.push("{");
    out.push("public:");
    for f in &fields {
        out.push(format!("    void Set{}({} value);", capitalize(&f.name), field_type_text(&f.ty)));
    }
    for (m, t) in &scripted {
        out.push(format!("    void Script{}({} value);", capitalize(m), t.keyword()));
        out.push(format!("    {} {m}();", t.keyword()));
    }
    for (m, t) in &scripted {
        out.push(format!("    {} {m}Script;", scripted_type(*t)));
    }
    out.push("};");
    for f in &fields {
        out.push("");
        out.push(format!(
            "inline void MOCK_{c}::Set{}({} value)",
            capitalize(&f.name),
            field_type_text(&f.ty)
        ));
        out.push("{");
        out.push(format!("    {} = value;", f.name));
        out.push("}");
    }
    for (m, t) in &scripted {
        out.push("");
        out.push(format!("inline void MOCK_{c}::Script{}({} value)", capitalize(m), t.keyword()));
        out.push("{");
        out.push(format!("    {m}Script.push(value);"));
        out.push("}");
        out.push("");
        out.push(format!("inline {} MOCK_{c}::{m}()", t.keyword()));
        out.push("{");
        out.push(format!("    return {m}Script.next();"));
        out.push("}");
    }
    out.finish()
}

/// auto / (auto + anchor) lines; 1 for an empty bundle.
pub fn measure_generation_ratio(bundle: &ScaffoldBundle) -> f64 {
    let total = bundle.auto_line_count + bundle.anchor_line_count;
    if total == 0 {
        1.0
    } else {
        bundle.auto_line_count as f64 / total as f64
    }
}

/// A marked region: 0-based line indices of the anchor and its end marker.
struct Region {
    kind: AnchorKind,
    start: usize,
    end: usize,
}

/// Finds `ANCHOR … END` pairs. Unknown kinds and unterminated anchors are
/// not regions.
fn scan_regions(text: &str) -> Vec<Region> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let kind = lines[i]
            .trim()
            .strip_prefix(ANCHOR_PREFIX)
            .and_then(|k| k.trim().parse::<AnchorKind>().ok());
        if let Some(kind) = kind {
            if let Some(off) = lines[i + 1..].iter().position(|l| l.trim() == ANCHOR_END) {
                out.push(Region {
                    kind,
                    start: i,
                    end: i + 1 + off,
                });
                i += off + 2;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Copies the body of every anchor region in `existing` into the region of
/// the same kind in `generated`. Returns the regions that found no home.
pub fn merge_text(generated: &str, existing: &str) -> (String, Vec<AnchorKind>) {
    let old_lines: Vec<&str> = existing.lines().collect();
    let mut saved: BTreeMap<AnchorKind, Vec<&str>> = scan_regions(existing)
        .into_iter()
        .map(|r| (r.kind, old_lines[r.start + 1..r.end].to_vec()))
        .collect();

    let new_lines: Vec<&str> = generated.lines().collect();
    let mut out: Vec<&str> = Vec::new();
    let mut next = 0;
    for r in scan_regions(generated) {
        out.extend(&new_lines[next..=r.start]);
        match saved.remove(&r.kind) {
            Some(body) => out.extend(body),
            None => out.extend(&new_lines[r.start + 1..r.end]),
        }
        next = r.end;
    }
    out.extend(&new_lines[next..]);
    let mut text = out.join("\n");
    text.push('\n');
    (text, saved.into_keys().collect())
}

/// Regenerated bundle with the hand edits of `existing` (file name → text)
/// carried over.
pub fn merge_bundle(generated: ScaffoldBundle, existing: &BTreeMap<String, String>) -> ScaffoldBundle {
    let mut warnings = generated.warnings.clone();
    let mut merge = |file: GeneratedFile| -> GeneratedFile {
        let Some(old) = existing.get(&file.name) else { return file };
        let (text, dropped) = merge_text(&file.text, old);
        warnings.extend(dropped.into_iter().map(|k| ScaffoldWarning::DroppedRegion {
            file: file.name.clone(),
            anchor: k.to_string(),
        }));
        GeneratedFile { name: file.name, text }
    };
    let fixture = merge(generated.fixture);
    let test_class = merge(generated.test_class);
    let mocks = generated.mocks.into_iter().map(|(k, f)| (k, merge(f))).collect();
    ScaffoldBundle::assemble(generated.class, fixture, test_class, mocks, warnings)
}
