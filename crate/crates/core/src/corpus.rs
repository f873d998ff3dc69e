//! Corpus programs on disk: `<program>/src/*.mini` holds the application
//! code, `<program>/tests/*.mini` holds test functions, and nothing else.
//! Files merge in sorted order (sources first), so a corpus directory maps
//! to exactly one program text and one content hash.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::minilang::ast::Program;
use crate::minilang::parser::parse_program;
use crate::minilang::typecheck;
use crate::runtime::coverage_of_suite;
use crate::search::persist::IoAt;

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub root: PathBuf,
    pub program: Program,
    /// (relative path, contents) in merge order.
    pub sources: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] IoAt),
    #[error("corpus layout: {0}")]
    Layout(String),
    #[error("corpus does not parse:\n{}", .0.join("\n"))]
    Parse(Vec<String>),
}

fn mini_files(dir: &Path) -> Result<Vec<PathBuf>, IoAt> {
    let mut files = Vec::new();
    if !dir.exists() {
        return Ok(files);
    }
    let entries = fs::read_dir(dir).map_err(|e| IoAt { path: dir.to_path_buf(), source: e })?;
    for entry in entries {
        let entry = entry.map_err(|e| IoAt { path: dir.to_path_buf(), source: e })?;
        let path = entry.path();
        if path.is_file() && path.extension().map(|e| e == "mini").unwrap_or(false) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads and merges one corpus program directory. Enforces the layout
/// split: no test functions under `src/`, only test functions under
/// `tests/`. The merged tree is renumbered but not yet typechecked.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError::Io(IoAt {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory"),
        }));
    }
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CorpusError::Layout(format!("{} has no program name", dir.display())))?
        .to_string();
    let src_dir = dir.join("src");
    if !src_dir.is_dir() {
        return Err(CorpusError::Layout(format!("{} is missing src/", dir.display())));
    }
    let mut sources = Vec::new();
    let mut functions = Vec::new();
    let mut diags = Vec::new();
    for (sub, tests_only) in [("src", false), ("tests", true)] {
        for path in mini_files(&dir.join(sub))? {
            let text = fs::read_to_string(&path)
                .map_err(|e| IoAt { path: path.clone(), source: e })?;
            let rel = format!(
                "{}/{}",
                sub,
                path.file_name().and_then(|n| n.to_str()).unwrap_or("?")
            );
            match parse_program(&text) {
                Ok(fragment) => {
                    for func in fragment.functions {
                        if tests_only && !func.is_test() {
                            return Err(CorpusError::Layout(format!(
                                "{}: non-test function '{}' under tests/",
                                rel, func.name
                            )));
                        }
                        if !tests_only && func.is_test() {
                            return Err(CorpusError::Layout(format!(
                                "{}: test function '{}' under src/",
                                rel, func.name
                            )));
                        }
                        functions.push(func);
                    }
                }
                Err(file_diags) => {
                    for d in file_diags {
                        diags.push(format!("{}: {}", rel, d));
                    }
                }
            }
            sources.push((rel, text));
        }
    }
    if !diags.is_empty() {
        return Err(CorpusError::Parse(diags));
    }
    if sources.iter().all(|(rel, _)| rel.starts_with("tests/")) {
        return Err(CorpusError::Layout(format!("{} has no source files", dir.display())));
    }
    let mut program = Program { functions };
    program.renumber();
    Ok(Corpus { name, root: dir.to_path_buf(), program, sources })
}

/// Content digest of the merged sources; file names participate, output
/// locations and anything outside the corpus directory do not.
pub fn corpus_hash(corpus: &Corpus) -> String {
    let mut hasher = Sha256::new();
    for (rel, text) in &corpus.sources {
        hasher.update(rel.as_bytes());
        hasher.update([0]);
        hasher.update(text.as_bytes());
        hasher.update([0]);
    }
    hex_digest(hasher)
}

/// Digest of one free-standing source text, for report provenance when a
/// program does not come from a corpus directory.
pub fn source_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hex_digest(hasher)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorpusCheck {
    pub statements: usize,
    pub application_statements: usize,
    pub tests: usize,
    pub coverage_ratio: f64,
    pub warnings: Vec<String>,
}

/// Validates that a loaded corpus is fit for variant synthesis: it
/// typechecks, its suite is green, and the suite exercises at least
/// `threshold` of the application statements. All findings are itemized.
pub fn corpus_check(corpus: &Corpus, fuel: u64, threshold: f64) -> Result<CorpusCheck, Vec<String>> {
    let mut problems = Vec::new();
    let diags = typecheck(&corpus.program);
    for d in &diags {
        problems.push(d.to_string());
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    let (suite, coverage) = coverage_of_suite(&corpus.program, fuel);
    for outcome in &suite.outcomes {
        if !outcome.passed() {
            problems.push(format!(
                "test {} does not pass: {}",
                outcome.name,
                outcome.detail.clone().unwrap_or_else(|| outcome.status.as_str().to_string())
            ));
        }
    }
    let app: BTreeSet<_> = corpus.program.application_statements().into_iter().collect();
    let covered = app.iter().filter(|id| coverage.all.contains(id)).count();
    let ratio = if app.is_empty() { 0.0 } else { covered as f64 / app.len() as f64 };
    if ratio < threshold {
        problems.push(format!(
            "statement coverage {:.1}% is below the {:.1}% threshold",
            ratio * 100.0,
            threshold * 100.0
        ));
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    Ok(CorpusCheck {
        statements: corpus.program.statement_count(),
        application_statements: app.len(),
        tests: corpus.program.test_functions().len(),
        coverage_ratio: ratio,
        warnings: suite.warnings,
    })
}
