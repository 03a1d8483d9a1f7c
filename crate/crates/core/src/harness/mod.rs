//! Benchmark harness: datasets, scoring, per-mode reports and comparisons.

mod bench;
mod dataset;
mod metrics;
mod report;

pub use bench::{run_bench, run_episodes, BenchOptions, BenchOutcome, ReportFile};
pub use dataset::{load_dataset, parse_dataset, sample_tasks, Dataset, DatasetFormat, TaskRecord};
pub use metrics::{exact_match, f1_score, mean_and_sample_std, normalize_answer};
pub use report::{
    accuracy_diff, aggregate, compare, render_comparison_table, render_run_summary, runtime_diff, strip_timing,
    ComparisonReport, RunReport, TaskOutcome, TIMING_FIELDS,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::engine::EngineError;
use crate::prompting::PromptError;
use crate::tools::ToolError;
use crate::trace::TraceError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("dataset format error at line {line}, column {column}: {message}")]
    DatasetFormat { line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("misaligned inputs: {0}")]
    Alignment(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error("serialization failed: {0}")]
    Serialize(String),
}
