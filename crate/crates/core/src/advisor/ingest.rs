//! Bug, commit, coverage and component-map files.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AdvisorWarning;

/// A calendar month, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    pub year: u16,
    pub month: u8,
}

impl Period {
    pub fn next(self) -> Period {
        if self.month == 12 {
            Period {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Period {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Every month from `self` to `last`, both included.
    pub fn through(self, last: Period) -> Vec<Period> {
        let mut out = Vec::new();
        let mut p = self;
        while p <= last {
            out.push(p);
            p = p.next();
        }
        out
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl std::str::FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("period must be YYYY-MM, got `{s}`");
        let b = s.as_bytes();
        if b.len() != 7 || b[4] != b'-' || !s[..4].bytes().chain(s[5..].bytes()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let year: u16 = s[..4].parse().map_err(|_| bad())?;
        let month: u8 = s[5..].parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(Period { year, month })
    }
}

impl Serialize for Period {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BugRecord {
    pub id: String,
    pub period: Period,
    pub culprit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathChange {
    pub path: String,
    pub lines: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitRecord {
    pub id: String,
    pub paths: Vec<PathChange>,
    /// Month the commit landed. When absent the commit is dated by the
    /// earliest bug that blames it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Period>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSnapshot {
    pub period: Period,
    pub component: String,
    pub functional_pct: f64,
    pub conditional_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub prefix: String,
    pub component: String,
}

/// Path-prefix rules; the first matching rule names the component.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentMap {
    pub rules: Vec<Rule>,
}

pub const UNMAPPED: &str = "UNMAPPED";

impl ComponentMap {
    pub fn component_of(&self, path: &str) -> &str {
        self.rules
            .iter()
            .find(|r| path.starts_with(&r.prefix))
            .map_or(UNMAPPED, |r| r.component.as_str())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}:{line}: {message}")]
    Schema { file: String, line: usize, message: String },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    fn schema(file: &str, line: usize, message: impl Into<String>) -> Self {
        IngestError::Schema {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }
}

trait Validate {
    fn validate(&self) -> Result<(), String>;
}

impl Validate for BugRecord {
    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty bug id".into());
        }
        if self.culprit.is_empty() {
            return Err(format!("bug `{}` has an empty culprit", self.id));
        }
        Ok(())
    }
}

impl Validate for CommitRecord {
    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty commit id".into());
        }
        if self.paths.is_empty() {
            return Err(format!("commit `{}` changes no paths", self.id));
        }
        if self.paths.iter().any(|p| p.path.is_empty()) {
            return Err(format!("commit `{}` has an empty path", self.id));
        }
        Ok(())
    }
}

impl Validate for CoverageSnapshot {
    fn validate(&self) -> Result<(), String> {
        if self.component.is_empty() {
            return Err("empty component".into());
        }
        for (name, v) in [("functional_pct", self.functional_pct), ("conditional_pct", self.conditional_pct)] {
            if !(0.0..=100.0).contains(&v) {
                return Err(format!("{name} {v} is outside [0, 100]"));
            }
        }
        Ok(())
    }
}

fn parse_lines<T: DeserializeOwned + Validate>(text: &str, file: &str) -> Result<Vec<(usize, T)>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line).map_err(|e| IngestError::schema(file, i + 1, e.to_string()))?;
        record.validate().map_err(|m| IngestError::schema(file, i + 1, m))?;
        out.push((i + 1, record));
    }
    Ok(out)
}

/// Bugs in file order; a repeated id keeps its first record.
pub fn parse_bugs(text: &str, file: &str) -> Result<(Vec<BugRecord>, Vec<AdvisorWarning>), IngestError> {
    let mut seen = HashSet::new();
    let mut bugs = Vec::new();
    let mut warnings = Vec::new();
    for (line, bug) in parse_lines::<BugRecord>(text, file)? {
        if seen.insert(bug.id.clone()) {
            bugs.push(bug);
        } else {
            warnings.push(AdvisorWarning::DuplicateRecord {
                file: file.to_string(),
                line,
                id: bug.id,
            });
        }
    }
    Ok((bugs, warnings))
}

/// Commits in file order; a repeated id keeps its first record.
pub fn parse_commits(text: &str, file: &str) -> Result<(Vec<CommitRecord>, Vec<AdvisorWarning>), IngestError> {
    let mut seen = HashSet::new();
    let mut commits = Vec::new();
    let mut warnings = Vec::new();
    for (line, commit) in parse_lines::<CommitRecord>(text, file)? {
        if seen.insert(commit.id.clone()) {
            commits.push(commit);
        } else {
            warnings.push(AdvisorWarning::DuplicateRecord {
                file: file.to_string(),
                line,
                id: commit.id,
            });
        }
    }
    Ok((commits, warnings))
}

pub fn parse_coverage(text: &str, file: &str) -> Result<Vec<CoverageSnapshot>, IngestError> {
    Ok(parse_lines(text, file)?.into_iter().map(|(_, s)| s).collect())
}

pub fn parse_component_map(text: &str, file: &str) -> Result<ComponentMap, IngestError> {
    let map: ComponentMap = serde_json::from_str(text).map_err(|e| IngestError::schema(file, e.line(), e.to_string()))?;
    if let Some(i) = map.rules.iter().position(|r| r.prefix.is_empty() || r.component.is_empty()) {
        return Err(IngestError::schema(file, 0, format!("rule {i} has an empty prefix or component")));
    }
    Ok(map)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub bugs: Vec<BugRecord>,
    pub commits: Vec<CommitRecord>,
    pub coverage: Vec<CoverageSnapshot>,
    pub map: ComponentMap,
    pub warnings: Vec<AdvisorWarning>,
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        file: path.display().to_string(),
        source,
    })
}

/// Reads and validates the four advisor inputs.
pub fn ingest(bugs: &Path, commits: &Path, coverage: &Path, map: &Path) -> Result<Ingested, IngestError> {
    let name = |p: &Path| p.display().to_string();
    let (bugs_v, mut warnings) = parse_bugs(&read(bugs)?, &name(bugs))?;
    let (commits_v, w) = parse_commits(&read(commits)?, &name(commits))?;
    warnings.extend(w);
    Ok(Ingested {
        bugs: bugs_v,
        commits: commits_v,
        coverage: parse_coverage(&read(coverage)?, &name(coverage))?,
        map: parse_component_map(&read(map)?, &name(map))?,
        warnings,
    })
}

/// Lines changed per component; unmatched paths count toward `UNMAPPED`.
pub fn map_commit_to_components(commit: &CommitRecord, map: &ComponentMap) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for change in &commit.paths {
        *out.entry(map.component_of(&change.path).to_string()).or_insert(0) += change.lines;
    }
    out
}
