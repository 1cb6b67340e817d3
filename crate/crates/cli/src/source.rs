//! Loading CUT-lang sources from a file or a directory of `.cut` files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ultgen_core::{parse_source, SourceError, SourceUnit};

pub const SOURCE_EXTENSION: &str = "cut";

pub struct SourceFile {
    /// Relative to the directory that was loaded, or the file name.
    pub name: String,
    pub text: String,
}

pub struct Sources {
    pub unit: SourceUnit,
    pub files: Vec<SourceFile>,
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect(&path, out)?;
        } else if path.extension().is_some_and(|e| e == SOURCE_EXTENSION) {
            out.push(path);
        }
    }
    Ok(())
}

/// Reads `path` (a file, or every `.cut` file below a directory in path
/// order) and parses the files as one unit so classes can refer to each
/// other across files.
pub fn load(path: &Path) -> Result<Sources> {
    let (root, paths) = if path.is_dir() {
        let mut paths = Vec::new();
        collect(path, &mut paths)?;
        (path.to_path_buf(), paths)
    } else {
        let parent = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (parent, vec![path.to_path_buf()])
    };
    let mut files = Vec::new();
    for p in &paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let name = p
            .strip_prefix(&root)
            .unwrap_or(p)
            .to_string_lossy()
            .replace('\\', "/");
        files.push(SourceFile { name, text });
    }
    if files.is_empty() {
        bail!("no classes found in {}", path.display());
    }

    // Syntax errors are reported against the file they occur in.
    for f in &files {
        if let Err(SourceError::Parse(e)) = parse_source(&f.text, &f.name) {
            bail!("{}:{e}", f.name);
        }
    }
    let mut joined = String::new();
    let mut starts = Vec::new();
    for f in &files {
        starts.push(joined.lines().count());
        joined.push_str(&f.text);
        if !joined.ends_with('\n') {
            joined.push('\n');
        }
    }
    let unit = parse_source(&joined, &path.to_string_lossy()).map_err(|e| {
        let line = match &e {
            SourceError::Type { node, .. } => Some(node.line as usize),
            SourceError::DuplicateName { span, .. } => Some(span.line as usize),
            _ => None,
        };
        match line.and_then(|l| locate(&files, &starts, l)) {
            Some((file, local)) => anyhow::anyhow!("{e} (in {file}, line {local})"),
            None => anyhow::anyhow!("{e}"),
        }
    })?;
    if unit.classes.iter().all(|c| c.is_extern) {
        bail!("no classes found in {}", path.display());
    }
    Ok(Sources { unit, files })
}

fn locate<'a>(files: &'a [SourceFile], starts: &[usize], line: usize) -> Option<(&'a str, usize)> {
    let i = starts.iter().rposition(|&s| s < line)?;
    Some((&files[i].name, line - starts[i]))
}
