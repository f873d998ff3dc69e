//! The nine statement-level transformations: delete, and the add/replace
//! flavors of the random, wittgenstein (name-driven), reaction
//! (type-context-driven) and steroid (reaction + variable renaming)
//! transplant strategies.
//!
//! Selection draws from a seeded generator and records every draw, so a
//! record can be audited and replayed. Application is pure: it produces a
//! fresh renumbered tree and never touches its input.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::minilang::ast::*;
use crate::minilang::rename_free_occurrences;
use crate::reactions::{compatible, ReactionIndex, StatementInfo};
use crate::runtime::CoverageMap;

// ---------------------------------------------------------------------------
// Kinds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformationKind {
    Delete,
    AddRandom,
    ReplaceRandom,
    AddWittgenstein,
    ReplaceWittgenstein,
    AddReaction,
    ReplaceReaction,
    AddSteroid,
    ReplaceSteroid,
}

/// How a kind picks its transplant, once the shared preconditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Delete,
    Random,
    Wittgenstein,
    Reaction,
    Steroid,
}

impl TransformationKind {
    pub const ALL: [TransformationKind; 9] = [
        TransformationKind::Delete,
        TransformationKind::AddRandom,
        TransformationKind::ReplaceRandom,
        TransformationKind::AddWittgenstein,
        TransformationKind::ReplaceWittgenstein,
        TransformationKind::AddReaction,
        TransformationKind::ReplaceReaction,
        TransformationKind::AddSteroid,
        TransformationKind::ReplaceSteroid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TransformationKind::Delete => "delete",
            TransformationKind::AddRandom => "add_random",
            TransformationKind::ReplaceRandom => "replace_random",
            TransformationKind::AddWittgenstein => "add_wittgenstein",
            TransformationKind::ReplaceWittgenstein => "replace_wittgenstein",
            TransformationKind::AddReaction => "add_reaction",
            TransformationKind::ReplaceReaction => "replace_reaction",
            TransformationKind::AddSteroid => "add_steroid",
            TransformationKind::ReplaceSteroid => "replace_steroid",
        }
    }

    pub fn parse(name: &str) -> Option<TransformationKind> {
        TransformationKind::ALL.iter().copied().find(|k| k.as_str() == name)
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            TransformationKind::Delete => Strategy::Delete,
            TransformationKind::AddRandom | TransformationKind::ReplaceRandom => Strategy::Random,
            TransformationKind::AddWittgenstein | TransformationKind::ReplaceWittgenstein => {
                Strategy::Wittgenstein
            }
            TransformationKind::AddReaction | TransformationKind::ReplaceReaction => Strategy::Reaction,
            TransformationKind::AddSteroid | TransformationKind::ReplaceSteroid => Strategy::Steroid,
        }
    }

    pub fn is_replace(&self) -> bool {
        matches!(
            self,
            TransformationKind::ReplaceRandom
                | TransformationKind::ReplaceWittgenstein
                | TransformationKind::ReplaceReaction
                | TransformationKind::ReplaceSteroid
        )
    }

    pub fn is_add(&self) -> bool {
        matches!(
            self,
            TransformationKind::AddRandom
                | TransformationKind::AddWittgenstein
                | TransformationKind::AddReaction
                | TransformationKind::AddSteroid
        )
    }
}

impl std::fmt::Display for TransformationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransformationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformationKind::parse(s).ok_or_else(|| format!("unknown transformation kind '{}'", s))
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One concrete transformation, fully determined: applying it needs no
/// randomness. `rng_draws` logs the raw selection draws for audit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransformationRecord {
    pub kind: TransformationKind,
    /// For add: the statement after which the copy is inserted. For
    /// replace/delete: the statement being replaced or removed.
    pub transplantation_point: StatementId,
    /// Absent for delete.
    pub transplant: Option<StatementId>,
    /// Steroid only: transplant free variable -> point-context variable.
    pub variable_mapping: BTreeMap<String, String>,
    pub rng_draws: Vec<u64>,
}

impl TransformationRecord {
    /// Identity for duplicate suppression: the same edit proposed twice
    /// counts as one variant, regardless of the draws that found it.
    pub fn dedup_key(&self) -> (TransformationKind, StatementId, Option<StatementId>, Vec<(String, String)>) {
        (
            self.kind,
            self.transplantation_point,
            self.transplant,
            self.variable_mapping.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Eligibility
// ---------------------------------------------------------------------------

/// Transplantation points: application statements that are covered by the
/// suite and have at least one compatible donor elsewhere. The add family
/// inserts immediately after its point, so the point doubles as the slot's
/// preceding-statement context and no slot ever sits at the start of a block.
pub fn eligible_points(coverage: &CoverageMap, index: &ReactionIndex) -> Vec<StatementId> {
    index
        .application_infos()
        .filter(|info| coverage.covers(info.id) && index.has_compatible_donor(info))
        .map(|info| info.id)
        .collect()
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

/// Cap on whole-mapping redraws when a steroid mapping would rename a free
/// variable onto a name the transplant itself declares internally.
const MAPPING_RETRIES: usize = 32;

fn replace_preconditions_ok(point: &StatementInfo, t: &StatementInfo) -> bool {
    if t.id == point.id {
        return false;
    }
    match point.class {
        // A declaration can only be replaced by a declaration of the same
        // type; later uses of the bound name must stay resolvable.
        StmtClass::Let => {
            t.class == StmtClass::Let
                && t.declared.as_ref().map(|d| &d.1) == point.declared.as_ref().map(|d| &d.1)
        }
        // A return can only be replaced by a return of the same value type
        // (bare returns match only bare returns).
        StmtClass::Return => t.class == StmtClass::Return && t.returned == point.returned,
        _ => true,
    }
}

fn strategy_admits(strategy: Strategy, point: &StatementInfo, t: &StatementInfo) -> bool {
    match strategy {
        Strategy::Random => true,
        Strategy::Wittgenstein => t.free_vars.keys().all(|n| point.names_used.contains(n)),
        Strategy::Reaction | Strategy::Steroid => compatible(&t.reaction, &point.reaction),
        Strategy::Delete => unreachable!("delete selects no transplant"),
    }
}

/// Draws a transplant (and, for steroid, a variable mapping) for the given
/// point. Returns None when the candidate set is empty; the caller records
/// that as a consumed attempt.
pub fn select_transplant<R: Rng>(
    kind: TransformationKind,
    point_id: StatementId,
    index: &ReactionIndex,
    rng: &mut R,
) -> Option<TransformationRecord> {
    let point = index.info(point_id)?;
    let strategy = kind.strategy();
    if strategy == Strategy::Delete {
        // Removing a return would strip control flow the surrounding
        // function depends on; such points yield no delete candidate.
        if point.class == StmtClass::Return {
            return None;
        }
        return Some(TransformationRecord {
            kind,
            transplantation_point: point_id,
            transplant: None,
            variable_mapping: BTreeMap::new(),
            rng_draws: Vec::new(),
        });
    }

    let replace = kind.is_replace();
    let candidates: Vec<&StatementInfo> = index
        .application_infos()
        .filter(|t| !replace || replace_preconditions_ok(point, t))
        .filter(|t| strategy_admits(strategy, point, t))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let mut draws = Vec::new();
    let choice = rng.gen_range(0..candidates.len());
    draws.push(choice as u64);
    let transplant = candidates[choice];

    let variable_mapping = if strategy == Strategy::Steroid {
        draw_mapping(point, transplant, rng, &mut draws)?
    } else {
        BTreeMap::new()
    };

    Some(TransformationRecord {
        kind,
        transplantation_point: point_id,
        transplant: Some(transplant.id),
        variable_mapping,
        rng_draws: draws,
    })
}

/// Uniform draw over the product of per-variable choices: each transplant
/// free variable independently picks a point-context variable of its type.
/// Mappings that would be captured by one of the transplant's own inner
/// declarations are rejected and redrawn.
fn draw_mapping<R: Rng>(
    point: &StatementInfo,
    transplant: &StatementInfo,
    rng: &mut R,
    draws: &mut Vec<u64>,
) -> Option<BTreeMap<String, String>> {
    if transplant.free_vars.is_empty() {
        return Some(BTreeMap::new());
    }
    let per_var: Vec<(&String, Vec<&String>)> = transplant
        .free_vars
        .iter()
        .map(|(name, ty)| {
            let targets: Vec<&String> = point
                .free_vars
                .iter()
                .filter(|(_, pty)| *pty == ty)
                .map(|(n, _)| n)
                .collect();
            (name, targets)
        })
        .collect();
    if per_var.iter().any(|(_, targets)| targets.is_empty()) {
        return None;
    }
    for _ in 0..MAPPING_RETRIES {
        let mut mapping = BTreeMap::new();
        let mut captured = false;
        for (name, targets) in &per_var {
            let choice = rng.gen_range(0..targets.len());
            draws.push(choice as u64);
            let target = targets[choice];
            if transplant.internal_binders.contains(target.as_str()) {
                captured = true;
            }
            mapping.insert((*name).clone(), target.clone());
        }
        if !captured {
            return Some(mapping);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid transformation record: {0}")]
pub struct InvalidRecord(pub String);

/// Result of applying a record: the new tree, plus the id (in the new
/// numbering) of the inserted or replacement statement, when there is one.
#[derive(Debug, Clone)]
pub struct Applied {
    pub program: Program,
    pub inserted: Option<StatementId>,
}

fn subtree_statement_count(stmt: &Statement) -> usize {
    fn block_count(block: &Block) -> usize {
        block.statements.iter().map(subtree_statement_count).sum()
    }
    1 + match &stmt.kind {
        StmtKind::If { then_block, else_block, .. } => {
            block_count(then_block) + else_block.as_ref().map(block_count).unwrap_or(0)
        }
        StmtKind::While { body, .. } => block_count(body),
        StmtKind::Block(inner) => block_count(inner),
        _ => 0,
    }
}

/// Applies a record to a tree, producing a fresh renumbered tree. The input
/// is never modified. Records that violate the transformation preconditions
/// are rejected; selection never produces such records, so rejections here
/// point at hand-built or corrupted records.
pub fn apply(program: &Program, record: &TransformationRecord) -> Result<Applied, InvalidRecord> {
    let point_id = record.transplantation_point;
    let point = program
        .find_statement(point_id)
        .ok_or_else(|| InvalidRecord(format!("no statement {}", point_id)))?;

    if record.kind == TransformationKind::Delete {
        if record.transplant.is_some() {
            return Err(InvalidRecord("delete carries a transplant".into()));
        }
        if point.class() == StmtClass::Return {
            return Err(InvalidRecord(format!("delete of return statement {}", point_id)));
        }
        let mut next = program.clone();
        next.remove_statement(point_id);
        next.renumber();
        return Ok(Applied { program: next, inserted: None });
    }

    let transplant_id = record
        .transplant
        .ok_or_else(|| InvalidRecord(format!("{} needs a transplant", record.kind)))?;
    let donor = program
        .find_statement(transplant_id)
        .ok_or_else(|| InvalidRecord(format!("no statement {}", transplant_id)))?;
    let mut copy = donor.clone();
    if !record.variable_mapping.is_empty() {
        rename_free_occurrences(&mut copy, &record.variable_mapping);
    }

    let mut next = program.clone();
    let inserted_id;
    if record.kind.is_replace() {
        if transplant_id == point_id {
            return Err(InvalidRecord(format!("statement {} replacing itself", point_id)));
        }
        match (&point.kind, &mut copy.kind) {
            (StmtKind::Let { name: old, declared_type: old_ty, .. }, StmtKind::Let { name, declared_type, .. }) => {
                if declared_type != old_ty {
                    return Err(InvalidRecord("declaration replaced with a different type".into()));
                }
                // The copy takes over the replacee's binder so later uses
                // keep resolving; its init cannot mention the old binder.
                *name = old.clone();
            }
            (StmtKind::Let { .. }, _) => {
                return Err(InvalidRecord("declaration replaced by a different statement kind".into()))
            }
            (StmtKind::Return(old), StmtKind::Return(new)) => {
                if old.is_some() != new.is_some() {
                    return Err(InvalidRecord("return shape mismatch".into()));
                }
            }
            (StmtKind::Return(_), _) => {
                return Err(InvalidRecord("return replaced by a different statement kind".into()))
            }
            _ => {}
        }
        next.replace_statement(point_id, copy);
        inserted_id = point_id;
    } else {
        next.insert_after(point_id, copy);
        inserted_id = StatementId(point_id.0 + subtree_statement_count(point));
    }
    next.renumber();
    Ok(Applied { program: next, inserted: Some(inserted_id) })
}
