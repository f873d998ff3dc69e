//! On-disk layout for campaign results.
//!
//! Each stored variant lives in `<out>/<program>/<kind>/<n>/` with three
//! files: `variant.mini` (full pretty-printed source), `record.json` (the
//! transformation record, enough to replay the edit), and `outcome.json`
//! (the classification). Sosies are stored by default; everything else only
//! on request.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::minilang::ast::Program;
use crate::minilang::parser::parse_program;
use crate::minilang::pretty::pretty_print;
use crate::search::campaign::{CampaignOutput, VariantClass, VariantOutcome};
use crate::transforms::{apply, TransformationKind, TransformationRecord};

/// An I/O failure annotated with the path it happened on.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct IoAt {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn at(path: &Path) -> impl FnOnce(io::Error) -> IoAt + '_ {
    move |source| IoAt { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoAt> {
    fs::write(path, contents).map_err(at(path))
}

fn read_file(path: &Path) -> Result<String, IoAt> {
    fs::read_to_string(path).map_err(at(path))
}

/// The classification section stored beside each variant.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StoredOutcome {
    pub class: VariantClass,
    pub diagnostics: Vec<String>,
    pub failing_tests: Vec<String>,
    pub steps: u64,
}

/// One variant reloaded from disk.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub dir: PathBuf,
    pub kind: TransformationKind,
    pub n: u64,
    pub record: TransformationRecord,
    pub outcome: StoredOutcome,
    pub source: String,
}

impl PoolEntry {
    pub fn parse_source(&self) -> Result<Program, String> {
        parse_program(&self.source)
            .map_err(|diags| format!("{}: {} parse diagnostics", self.dir.display(), diags.len()))
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Writes the selected outcomes of a campaign under `out_root/<program>/`.
/// Returns the directories written, in storage order.
pub fn persist_campaign(
    original: &Program,
    program_name: &str,
    output: &CampaignOutput,
    out_root: &Path,
    keep_all: bool,
) -> Result<Vec<PathBuf>, IoAt> {
    let mut written = Vec::new();
    let mut per_kind: std::collections::BTreeMap<TransformationKind, u64> = Default::default();
    for outcome in &output.outcomes {
        if outcome.class != VariantClass::Sosie && !keep_all {
            continue;
        }
        let n = per_kind.entry(outcome.record.kind).or_insert(0);
        *n += 1;
        let dir = out_root
            .join(program_name)
            .join(outcome.record.kind.as_str())
            .join(n.to_string());
        persist_variant(original, outcome, &dir)?;
        written.push(dir);
    }
    Ok(written)
}

fn persist_variant(original: &Program, outcome: &VariantOutcome, dir: &Path) -> Result<(), IoAt> {
    fs::create_dir_all(dir).map_err(at(dir))?;
    let applied = apply(original, &outcome.record)
        .map_err(|e| IoAt { path: dir.to_path_buf(), source: io::Error::new(io::ErrorKind::InvalidData, e.to_string()) })?;
    write_file(&dir.join("variant.mini"), &pretty_print(&applied.program))?;
    write_file(&dir.join("record.json"), &json_line(&outcome.record))?;
    let stored = StoredOutcome {
        class: outcome.class,
        diagnostics: outcome.diagnostics.clone(),
        failing_tests: outcome.failing_tests.clone(),
        steps: outcome.steps,
    };
    write_file(&dir.join("outcome.json"), &json_line(&stored))?;
    Ok(())
}

/// Loads every stored variant for a program, ordered by kind then sequence
/// number. Unknown directory names are reported as errors, not skipped.
pub fn load_pool(out_root: &Path, program_name: &str) -> Result<Vec<PoolEntry>, IoAt> {
    let root = out_root.join(program_name);
    let mut entries = Vec::new();
    if !root.exists() {
        return Ok(entries);
    }
    let mut kind_dirs: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(&root).map_err(at(&root))? {
        let entry = entry.map_err(at(&root))?;
        if entry.path().is_dir() {
            kind_dirs.push(entry.path());
        }
    }
    kind_dirs.sort();
    for kind_dir in kind_dirs {
        let kind_name = kind_dir.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let Some(kind) = TransformationKind::parse(kind_name) else {
            return Err(IoAt {
                path: kind_dir.clone(),
                source: io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("not a transformation kind: {}", kind_name),
                ),
            });
        };
        let mut numbered: Vec<(u64, PathBuf)> = Vec::new();
        for entry in fs::read_dir(&kind_dir).map_err(at(&kind_dir))? {
            let entry = entry.map_err(at(&kind_dir))?;
            let path = entry.path();
            if !path.is_dir() {
                continue;
            }
            let n = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.parse::<u64>().ok());
            match n {
                Some(n) => numbered.push((n, path)),
                None => {
                    return Err(IoAt {
                        path,
                        source: io::Error::new(io::ErrorKind::InvalidData, "not a variant number"),
                    })
                }
            }
        }
        numbered.sort();
        for (n, dir) in numbered {
            entries.push(load_entry(kind, n, &dir)?);
        }
    }
    Ok(entries)
}

fn load_entry(kind: TransformationKind, n: u64, dir: &Path) -> Result<PoolEntry, IoAt> {
    let record_path = dir.join("record.json");
    let record: TransformationRecord = serde_json::from_str(&read_file(&record_path)?)
        .map_err(|e| IoAt { path: record_path.clone(), source: io::Error::new(io::ErrorKind::InvalidData, e.to_string()) })?;
    let outcome_path = dir.join("outcome.json");
    let outcome: StoredOutcome = serde_json::from_str(&read_file(&outcome_path)?)
        .map_err(|e| IoAt { path: outcome_path.clone(), source: io::Error::new(io::ErrorKind::InvalidData, e.to_string()) })?;
    let source = read_file(&dir.join("variant.mini"))?;
    Ok(PoolEntry { dir: dir.to_path_buf(), kind, n, record, outcome, source })
}
