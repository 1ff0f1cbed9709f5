//! Downstream tasks over curated graphs. Every task only reads state.

mod analysis;
mod keywords;
mod qa;
mod quality;
mod reasoning;

pub use analysis::{
    analysis_payload, analysis_request, parse_analysis, run_analysis, AnalysisOutcome, AnalysisReport, AnalysisRequest,
    GapItem, HealthItem, HealthStatus, Level, QuestionableTriple, RecommendedAction, RiskItem, Severity, PRESETS,
};
pub use keywords::{extract_keywords, match_entities, EntityMatch, STOP_WORDS};
pub use qa::{kgqa, kgqa_retrieve, serialize_facts, KgqaOptions, KgqaResult};
pub use quality::{
    checklist_by_name, coverage_gaps, detect_duplicates, duplicate_pairs, provenance_trace, schema_diagnostics, Checklist,
    ChecklistTopic, DiagnosticsReport, DuplicatePair, DuplicateReason, GapReport, GenericSubject, PredicateVariants,
    TraceFilter, TraceRow, DEFAULT_MAX_EDIT_DISTANCE, GENERIC_SUBJECTS, MIN_ALIAS_LEN,
};
pub use reasoning::{bounded_hop, compare_entities, path_search, ComparisonReport, DEFAULT_MAX_PATHS, MAX_TASK_HOPS};
