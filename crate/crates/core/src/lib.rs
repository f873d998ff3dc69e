//! Synthesis of computationally diverse variants of MiniLang programs.
//!
//! The pipeline: parse and typecheck a small statically typed language
//! ([`minilang`]), execute its test suites with tracing and coverage
//! ([`runtime`]), summarize every statement's typed I/O shape
//! ([`reactions`]), transplant statements under kind-specific
//! preconditions ([`transforms`]), run seeded search campaigns that
//! classify each variant against the suite ([`search`]), and compare the
//! execution traces of the surviving variants with the original
//! ([`diversity`]). [`corpus`] loads bundled programs from disk and
//! [`cli`] ties the pieces into the `sosieforge` binary.

pub mod cli;
pub mod corpus;
pub mod diversity;
pub mod minilang;
pub mod reactions;
pub mod runtime;
pub mod search;
pub mod transforms;

pub use corpus::{corpus_check, corpus_hash, load_corpus, Corpus, CorpusError};
pub use diversity::{
    build_noise_mask, compare_traces, measure_diversity, DiversityReport, DiversityVerdict,
    NoiseMask,
};
pub use minilang::{parse_program, pretty_print, typecheck, Program, StatementId, StaticType};
pub use reactions::{count_candidates, Reaction, ReactionIndex, StatementInfo};
pub use runtime::{
    run_suite, run_test, CoverageMap, ExecutionTrace, SuiteResult, TestOutcome, TestStatus,
    DEFAULT_FUEL,
};
pub use search::{
    classify_variant, load_pool, persist_campaign, run_campaign, CampaignConfig, CampaignOutput,
    CampaignReport, PoolEntry, VariantClass,
};
pub use transforms::{apply, eligible_points, select_transplant, TransformationKind, TransformationRecord};
