//! Inputs shared by the benchmarks.

use std::fs;
use std::path::PathBuf;

/// The corpus sources joined into one text, in file name order.
pub fn corpus_text() -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus/src");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "cut"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| fs::read_to_string(p).expect("corpus file") + "\n")
        .collect()
}
