//! Campaign metrics: the per-kind table, its JSON schema, the CSV mirror,
//! and the human-readable rendering.
//!
//! `report.json` is a pure function of (corpus, config): identical runs
//! produce identical bytes. Wall-clock derived numbers live in a separate
//! `timing.json` so they never break that contract.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::minilang::ast::Program;
use crate::reactions::{count_candidates, ReactionIndex};
use crate::search::campaign::CampaignOutput;
use crate::transforms::TransformationKind;

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KindRow {
    pub kind: String,
    pub attempts: u64,
    pub no_candidate: u64,
    pub duplicates: u64,
    pub tested_statements: u64,
    pub tested_ratio: f64,
    pub candidates: u64,
    pub variants: u64,
    pub compilable: u64,
    pub compile_ratio: f64,
    pub sosies: u64,
    pub degenerated: u64,
    pub ill_formed: u64,
    pub sosie_density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Totals {
    pub attempts: u64,
    pub no_candidate: u64,
    pub duplicates: u64,
    pub variants: u64,
    pub compilable: u64,
    pub sosies: u64,
    pub degenerated: u64,
    pub ill_formed: u64,
    pub sosie_density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CampaignReport {
    pub program: String,
    pub seed: u64,
    pub budget: u64,
    pub fuel: u64,
    pub config_hash: String,
    pub corpus_hash: String,
    pub application_statements: u64,
    pub coverage_ratio: f64,
    pub eligible_points: u64,
    pub warnings: Vec<String>,
    pub per_kind: Vec<KindRow>,
    pub totals: Totals,
}

/// Wall-clock sidecar. Everything here varies run to run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct TimingReport {
    pub wall_seconds: f64,
    pub per_kind: Vec<KindTiming>,
    pub total_sosies_per_hour: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KindTiming {
    pub kind: String,
    pub evaluation_seconds: f64,
    pub sosies_per_hour: f64,
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn per_hour(count: u64, seconds: f64) -> f64 {
    if seconds <= 0.0 {
        0.0
    } else {
        count as f64 / (seconds / 3600.0)
    }
}

/// Digest of the knobs that determine campaign behavior. Output locations
/// deliberately stay out: where results land cannot change what they are.
pub fn config_hash(seed: u64, budget: u64, kinds: &[TransformationKind], fuel: u64) -> String {
    let mut hasher = Sha256::new();
    let names: Vec<&str> = kinds.iter().map(|k| k.as_str()).collect();
    hasher.update(format!("seed={};budget={};kinds={};fuel={}", seed, budget, names.join(","), fuel));
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

pub fn build_report(
    program_name: &str,
    program: &Program,
    index: &ReactionIndex,
    output: &CampaignOutput,
    corpus_hash: &str,
) -> (CampaignReport, TimingReport) {
    let app: Vec<_> = program.application_statements();
    let app_set: BTreeSet<_> = app.iter().copied().collect();
    let covered_app = output.coverage.all.iter().filter(|id| app_set.contains(id)).count() as u64;

    let mut per_kind = Vec::new();
    let mut kind_timings = Vec::new();
    let mut totals = Totals {
        attempts: 0,
        no_candidate: 0,
        duplicates: 0,
        variants: 0,
        compilable: 0,
        sosies: 0,
        degenerated: 0,
        ill_formed: 0,
        sosie_density: 0.0,
    };
    for (kind, stat) in &output.stats {
        let candidates = count_candidates(*kind, &output.eligible, index);
        let compilable = stat.compilable();
        per_kind.push(KindRow {
            kind: kind.as_str().to_string(),
            attempts: stat.attempts,
            no_candidate: stat.no_candidate,
            duplicates: stat.duplicates,
            tested_statements: stat.tested_points.len() as u64,
            tested_ratio: ratio(stat.tested_points.len() as u64, output.eligible.len() as u64),
            candidates,
            variants: stat.variants,
            compilable,
            compile_ratio: ratio(compilable, stat.variants),
            sosies: stat.sosies,
            degenerated: stat.degenerated,
            ill_formed: stat.ill_formed,
            sosie_density: ratio(stat.sosies, stat.variants),
        });
        kind_timings.push(KindTiming {
            kind: kind.as_str().to_string(),
            evaluation_seconds: stat.evaluation_seconds,
            sosies_per_hour: per_hour(stat.sosies, stat.evaluation_seconds),
        });
        totals.attempts += stat.attempts;
        totals.no_candidate += stat.no_candidate;
        totals.duplicates += stat.duplicates;
        totals.variants += stat.variants;
        totals.compilable += compilable;
        totals.sosies += stat.sosies;
        totals.degenerated += stat.degenerated;
        totals.ill_formed += stat.ill_formed;
    }
    totals.sosie_density = ratio(totals.sosies, totals.variants);

    let report = CampaignReport {
        program: program_name.to_string(),
        seed: output.config.seed,
        budget: output.config.budget,
        fuel: output.config.fuel,
        config_hash: config_hash(
            output.config.seed,
            output.config.budget,
            &output.config.kinds,
            output.config.fuel,
        ),
        corpus_hash: corpus_hash.to_string(),
        application_statements: app.len() as u64,
        coverage_ratio: ratio(covered_app, app.len() as u64),
        eligible_points: output.eligible.len() as u64,
        warnings: output.warnings.clone(),
        per_kind,
        totals,
    };
    let timing = TimingReport {
        wall_seconds: output.wall_seconds,
        per_kind: kind_timings,
        total_sosies_per_hour: per_hour(report.totals.sosies, output.wall_seconds),
    };
    (report, timing)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

pub fn report_json(report: &CampaignReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn timing_json(timing: &TimingReport) -> String {
    let mut text = serde_json::to_string_pretty(timing).expect("timing serializes");
    text.push('\n');
    text
}

/// One CSV row per kind plus a total row. Floats use the shortest
/// round-trip form, so the CSV carries exactly the JSON values.
pub fn report_csv(report: &CampaignReport, timing: &TimingReport) -> String {
    let mut out = String::from(
        "kind,tested_statements,tested_ratio,candidates,variants,compilable,compile_ratio,sosies,sosie_density,sosies_per_hour\n",
    );
    for row in &report.per_kind {
        let sph = timing
            .per_kind
            .iter()
            .find(|t| t.kind == row.kind)
            .map(|t| t.sosies_per_hour)
            .unwrap_or(0.0);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.kind,
            row.tested_statements,
            row.tested_ratio,
            row.candidates,
            row.variants,
            row.compilable,
            row.compile_ratio,
            row.sosies,
            row.sosie_density,
            sph
        ));
    }
    out.push_str(&format!(
        "total,,,,{},{},,{},{},{}\n",
        report.totals.variants,
        report.totals.compilable,
        report.totals.sosies,
        report.totals.sosie_density,
        timing.total_sosies_per_hour
    ));
    out
}

/// Density cell: 0%, <1% for nonzero sub-percent values, whole percents
/// otherwise.
pub fn format_density(density: f64) -> String {
    if density <= 0.0 {
        "0%".to_string()
    } else if density < 0.01 {
        "<1%".to_string()
    } else {
        format!("{}%", (density * 100.0).round() as u64)
    }
}

fn format_percent(ratio: f64) -> String {
    format!("{}%", (ratio * 100.0).round() as u64)
}

/// Plain-text table over the per-kind rows, one line per kind plus totals.
pub fn render_report(report: &CampaignReport, timing: Option<&TimingReport>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "program {}  seed {}  budget {}  eligible points {}  coverage {}\n",
        report.program,
        report.seed,
        report.budget,
        report.eligible_points,
        format_percent(report.coverage_ratio)
    ));
    for warning in &report.warnings {
        out.push_str(&format!("warning: {}\n", warning));
    }
    out.push_str(&format!(
        "{:<22} {:>12} {:>12} {:>9} {:>12} {:>8} {:>9} {:>10}\n",
        "kind", "tested stmts", "candidates", "variants", "compilable", "sosies", "density", "sosies/h"
    ));
    for row in &report.per_kind {
        let sph = timing
            .and_then(|t| t.per_kind.iter().find(|k| k.kind == row.kind))
            .map(|k| format!("{:.1}", k.sosies_per_hour))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{:<22} {:>12} {:>12} {:>9} {:>12} {:>8} {:>9} {:>10}\n",
            row.kind,
            format!("{} ({})", row.tested_statements, format_percent(row.tested_ratio)),
            row.candidates,
            row.variants,
            format!("{} ({})", row.compilable, format_percent(row.compile_ratio)),
            row.sosies,
            format_density(row.sosie_density),
            sph
        ));
    }
    let total_sph = timing
        .map(|t| format!("{:.1}", t.total_sosies_per_hour))
        .unwrap_or_else(|| "-".to_string());
    out.push_str(&format!(
        "{:<22} {:>12} {:>12} {:>9} {:>12} {:>8} {:>9} {:>10}\n",
        "total",
        "",
        "",
        report.totals.variants,
        report.totals.compilable,
        report.totals.sosies,
        format_density(report.totals.sosie_density),
        total_sph
    ));
    out
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Parses and checks a report, reporting the JSON path of the first
/// violation. Checks structure first, then the internal count identities.
pub fn validate_report(text: &str) -> Result<CampaignReport, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("$: not valid JSON: {}", e))?;
    let obj = value.as_object().ok_or("$: expected an object")?;
    for key in ["program", "seed", "per_kind", "totals"] {
        if !obj.contains_key(key) {
            return Err(format!("$.{}: missing", key));
        }
    }
    let rows = obj["per_kind"]
        .as_array()
        .ok_or("$.per_kind: expected an array")?;
    for (i, row) in rows.iter().enumerate() {
        let row_obj = row
            .as_object()
            .ok_or_else(|| format!("$.per_kind[{}]: expected an object", i))?;
        for key in ["kind", "variants", "compilable", "sosies", "sosie_density"] {
            if !row_obj.contains_key(key) {
                return Err(format!("$.per_kind[{}].{}: missing", i, key));
            }
        }
    }
    let report: CampaignReport =
        serde_json::from_value(value).map_err(|e| format!("$: schema mismatch: {}", e))?;
    for (i, row) in report.per_kind.iter().enumerate() {
        if row.compilable > row.variants {
            return Err(format!("$.per_kind[{}].compilable: exceeds variants", i));
        }
        if row.sosies > row.compilable {
            return Err(format!("$.per_kind[{}].sosies: exceeds compilable", i));
        }
        let density = ratio(row.sosies, row.variants);
        if (density - row.sosie_density).abs() > 1e-9 {
            return Err(format!("$.per_kind[{}].sosie_density: inconsistent with counts", i));
        }
    }
    Ok(report)
}
