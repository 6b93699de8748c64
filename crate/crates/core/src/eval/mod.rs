//! Budgeted per-level evaluation, aggregation over levels and seeds,
//! learning curves and result export.

mod aggregate;
mod export;
mod harness;

pub use aggregate::{aggregate, learning_curve, AggregateResult, LevelSummary};
pub use export::{read_json, write_csv, write_curve_tsv, write_json, CSV_HEADER};
pub use harness::{evaluate_level, evaluate_matrix, AgentFactory, EpisodeRecord, EvalConfig, LevelResult};
