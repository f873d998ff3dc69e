pub mod campaign;
pub mod persist;
pub mod report;

pub use campaign::{
    classify_variant, run_campaign, CampaignConfig, CampaignError, CampaignOutput, Classification,
    KindStats, VariantClass, VariantOutcome,
};
pub use persist::{load_pool, persist_campaign, IoAt, PoolEntry, StoredOutcome};
pub use report::{
    build_report, config_hash, format_density, render_report, report_csv, report_json,
    timing_json, validate_report, CampaignReport, KindRow, KindTiming, TimingReport, Totals,
};
