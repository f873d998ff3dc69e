//! Budget-based variant search: draw a transplantation point, try every
//! enabled transformation kind on it, classify what comes out.
//!
//! All randomness flows from one seeded generator, so a (corpus, config)
//! pair fully determines the records, their classifications, and the
//! resulting metrics. Wall-clock timings are collected on the side and kept
//! out of anything that is compared across runs.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::minilang::ast::{Program, StatementId};
use crate::minilang::typecheck;
use crate::reactions::ReactionIndex;
use crate::runtime::{coverage_of_suite, run_suite_selected, CoverageMap, DEFAULT_FUEL};
use crate::transforms::{
    apply, eligible_points, select_transplant, TransformationKind, TransformationRecord,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Number of transplantation-point draws; every enabled kind gets one
    /// attempt per draw.
    pub budget: u64,
    pub kinds: Vec<TransformationKind>,
    pub fuel: u64,
    /// Evaluate record batches on the rayon pool instead of sequentially.
    pub parallel: bool,
}

impl Default for CampaignConfig {
    fn default() -> CampaignConfig {
        CampaignConfig {
            seed: 0,
            budget: 100,
            kinds: TransformationKind::ALL.to_vec(),
            fuel: DEFAULT_FUEL,
            parallel: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantClass {
    /// Typechecks and every test passes.
    Sosie,
    /// Typechecks but at least one test does not pass.
    Degenerated,
    /// Does not typecheck.
    IllFormed,
}

impl VariantClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariantClass::Sosie => "sosie",
            VariantClass::Degenerated => "degenerated",
            VariantClass::IllFormed => "ill_formed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub class: VariantClass,
    /// Typechecker output for ill-formed variants.
    pub diagnostics: Vec<String>,
    pub failing_tests: Vec<String>,
    /// Interpreter steps spent on the tests that ran.
    pub steps: u64,
}

/// Full classification: typecheck, then the whole suite. This is the
/// definition-level check; the campaign itself uses a test subset proven
/// equivalent (see `classify_with_selection`).
pub fn classify_variant(program: &Program, fuel: u64) -> Classification {
    classify_with_selection(program, fuel, None)
}

/// Classifies running only `selected` tests (all tests when None), stopping
/// at the first failure. Selecting exactly the tests whose baseline
/// execution reaches the transplantation point is sound: control reaches a
/// block slot only by completing the statement before it, so a test that
/// never executed the point statement in the original cannot reach the
/// edited region in the variant and replays its baseline run verbatim.
fn classify_with_selection(
    program: &Program,
    fuel: u64,
    selected: Option<&BTreeSet<String>>,
) -> Classification {
    let diags = typecheck(program);
    if !diags.is_empty() {
        return Classification {
            class: VariantClass::IllFormed,
            diagnostics: diags.iter().map(|d| d.to_string()).collect(),
            failing_tests: Vec::new(),
            steps: 0,
        };
    }
    let suite = run_suite_selected(program, fuel, selected, true);
    let failing = suite.failing_tests();
    Classification {
        class: if failing.is_empty() { VariantClass::Sosie } else { VariantClass::Degenerated },
        diagnostics: Vec::new(),
        failing_tests: failing,
        steps: suite.total_steps(),
    }
}

// ---------------------------------------------------------------------------
// Outcomes and per-kind accounting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub record: TransformationRecord,
    pub class: VariantClass,
    pub diagnostics: Vec<String>,
    pub failing_tests: Vec<String>,
    pub steps: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct KindStats {
    pub attempts: u64,
    pub no_candidate: u64,
    pub duplicates: u64,
    pub variants: u64,
    pub sosies: u64,
    pub degenerated: u64,
    pub ill_formed: u64,
    /// Points where this kind produced at least one record.
    pub tested_points: BTreeSet<StatementId>,
    pub evaluation_seconds: f64,
}

impl KindStats {
    pub fn compilable(&self) -> u64 {
        self.sosies + self.degenerated
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub config: CampaignConfig,
    pub eligible: Vec<StatementId>,
    pub coverage: CoverageMap,
    /// Unique records in draw order with their classifications.
    pub outcomes: Vec<VariantOutcome>,
    pub stats: BTreeMap<TransformationKind, KindStats>,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
}

impl CampaignOutput {
    pub fn sosies(&self) -> impl Iterator<Item = &VariantOutcome> {
        self.outcomes.iter().filter(|o| o.class == VariantClass::Sosie)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum CampaignError {
    #[error("baseline suite fails on: {}", .0.join(", "))]
    BaselineFails(Vec<String>),
    #[error("campaign budget is zero-length with no enabled kinds")]
    NoKinds,
}

// ---------------------------------------------------------------------------
// The campaign loop
// ---------------------------------------------------------------------------

pub fn run_campaign(program: &Program, config: &CampaignConfig) -> Result<CampaignOutput, CampaignError> {
    let started = Instant::now();
    if config.kinds.is_empty() {
        return Err(CampaignError::NoKinds);
    }
    let (baseline, coverage) = coverage_of_suite(program, config.fuel);
    if !baseline.passed() {
        return Err(CampaignError::BaselineFails(baseline.failing_tests()));
    }
    let mut warnings = baseline.warnings.clone();

    let index = ReactionIndex::build(program);
    let eligible = eligible_points(&coverage, &index);
    let mut stats: BTreeMap<TransformationKind, KindStats> = config
        .kinds
        .iter()
        .map(|k| (*k, KindStats::default()))
        .collect();
    let mut outcomes: Vec<VariantOutcome> = Vec::new();

    if eligible.is_empty() {
        warnings.push("no eligible transplantation points; campaign is empty".to_string());
        return Ok(CampaignOutput {
            config: config.clone(),
            eligible,
            coverage,
            outcomes,
            stats,
            wall_seconds: started.elapsed().as_secs_f64(),
            warnings,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen = BTreeSet::new();
    for _ in 0..config.budget {
        let point = eligible[rng.gen_range(0..eligible.len())];
        let selected: BTreeSet<String> = coverage.tests_covering(point).into_iter().collect();
        let mut batch: Vec<TransformationRecord> = Vec::new();
        for kind in &config.kinds {
            let stat = stats.get_mut(kind).unwrap();
            stat.attempts += 1;
            match select_transplant(*kind, point, &index, &mut rng) {
                None => stat.no_candidate += 1,
                Some(record) => {
                    stat.tested_points.insert(point);
                    if seen.insert(record.dedup_key()) {
                        batch.push(record);
                    } else {
                        stat.duplicates += 1;
                    }
                }
            }
        }

        let evaluated: Vec<VariantOutcome> = if config.parallel {
            batch
                .into_par_iter()
                .map(|record| evaluate(program, record, config.fuel, &selected))
                .collect()
        } else {
            batch
                .into_iter()
                .map(|record| evaluate(program, record, config.fuel, &selected))
                .collect()
        };

        for outcome in evaluated {
            let stat = stats.get_mut(&outcome.record.kind).unwrap();
            stat.variants += 1;
            stat.evaluation_seconds += outcome.seconds;
            match outcome.class {
                VariantClass::Sosie => stat.sosies += 1,
                VariantClass::Degenerated => stat.degenerated += 1,
                VariantClass::IllFormed => stat.ill_formed += 1,
            }
            outcomes.push(outcome);
        }
    }

    Ok(CampaignOutput {
        config: config.clone(),
        eligible,
        coverage,
        outcomes,
        stats,
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    })
}

fn evaluate(
    program: &Program,
    record: TransformationRecord,
    fuel: u64,
    selected: &BTreeSet<String>,
) -> VariantOutcome {
    let eval_start = Instant::now();
    let classification = match apply(program, &record) {
        Ok(applied) => classify_with_selection(&applied.program, fuel, Some(selected)),
        // Selection and apply agree on preconditions, so this arm flags a
        // bug rather than a normal ill-formed variant; keep the evidence.
        Err(err) => Classification {
            class: VariantClass::IllFormed,
            diagnostics: vec![format!("apply rejected its own record: {}", err)],
            failing_tests: Vec::new(),
            steps: 0,
        },
    };
    VariantOutcome {
        record,
        class: classification.class,
        diagnostics: classification.diagnostics,
        failing_tests: classification.failing_tests,
        steps: classification.steps,
        seconds: eval_start.elapsed().as_secs_f64(),
    }
}
