use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::info;
use serde::{Deserialize, Serialize};

use super::dataset::TaskRecord;
use super::report::{aggregate, compare, render_comparison_table, ComparisonReport, RunReport};
use super::HarnessError;
use crate::config::Runtime;
use crate::engine::{run_episode, EngineError};
use crate::prompting::PromptPlan;
use crate::trace::{save_episodes, TraceDetail};
use crate::transcript::{Episode, Mode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchOptions {
    pub modes: Vec<Mode>,
    /// Episodes in flight at once.
    pub concurrency: usize,
    pub trace_detail: TraceDetail,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { modes: vec![Mode::Vanilla, Mode::Focused], concurrency: 1, trace_detail: TraceDetail::Full }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub reports: Vec<RunReport>,
    pub comparison: Option<ComparisonReport>,
    pub table: Option<String>,
    pub episodes: usize,
}

/// A report together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub config: String,
    pub report: T,
}

/// Runs every task once in `mode`. Results come back in task order whatever
/// the concurrency.
pub fn run_episodes(
    runtime: &Runtime,
    tasks: &[TaskRecord],
    mode: Mode,
    concurrency: usize,
) -> Result<Vec<Episode>, HarnessError> {
    let plan = PromptPlan::new(mode, runtime.prompts.clone())?;
    let mut cfg = runtime.engine.clone();
    cfg.mode = mode;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Episode, EngineError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let worker = || loop {
        let index = next.fetch_add(1, Ordering::SeqCst);
        let Some(task) = tasks.get(index) else { break };
        let backend = runtime.backends.for_episode(&task.id, mode);
        let mut tools = runtime.tools.toolset();
        let outcome =
            run_episode(&task.id, &task.question, &cfg, backend.as_ref(), &mut tools, &plan, &runtime.fewshot);
        if let Ok(episode) = &outcome {
            info!("[{mode}] {} -> {} ({} steps)", task.id, episode.termination, episode.steps.len());
        }
        results.lock().expect("results poisoned")[index] = Some(outcome);
    };
    std::thread::scope(|scope| {
        for _ in 0..concurrency.clamp(1, tasks.len().max(1)) {
            scope.spawn(worker);
        }
    });
    results
        .into_inner()
        .expect("results poisoned")
        .into_iter()
        .map(|slot| slot.expect("every task ran").map_err(HarnessError::from))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Runs `tasks` under each mode and writes the run directory:
/// `config.toml`, `traces/<mode>.jsonl`, `reports/<mode>.json` and, when both
/// modes ran, `reports/comparison.{json,txt}`.
pub fn run_bench(
    runtime: &Runtime,
    tasks: &[TaskRecord],
    options: &BenchOptions,
    run_dir: &Path,
    config_snapshot: &str,
) -> Result<BenchOutcome, HarnessError> {
    if tasks.is_empty() {
        return Err(HarnessError::InvalidInput("no tasks to run".into()));
    }
    let mut modes = options.modes.clone();
    modes.sort();
    modes.dedup();
    if modes.is_empty() {
        return Err(HarnessError::InvalidInput("no modes selected".into()));
    }
    let reports_dir = run_dir.join("reports");
    for dir in [run_dir.to_path_buf(), run_dir.join("traces"), reports_dir.clone()] {
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
    }
    let config_path = run_dir.join("config.toml");
    fs::write(&config_path, config_snapshot).map_err(|source| HarnessError::Io { path: config_path, source })?;

    let mut reports = Vec::new();
    let mut episodes_run = 0;
    for &mode in &modes {
        let episodes = run_episodes(runtime, tasks, mode, options.concurrency)?;
        episodes_run += episodes.len();
        save_episodes(&episodes, &run_dir.join("traces").join(format!("{mode}.jsonl")), options.trace_detail)?;
        let report = aggregate(&episodes, tasks, mode)?;
        write_json(
            &reports_dir.join(format!("{mode}.json")),
            &ReportFile { config: config_snapshot.to_string(), report: &report },
        )?;
        reports.push(report);
    }
    runtime.tools.persist_cache()?;

    let baseline = reports.iter().find(|r| r.mode == Mode::Vanilla);
    let focused = reports.iter().find(|r| r.mode == Mode::Focused);
    let (comparison, table) = match (baseline, focused) {
        (Some(baseline), Some(focused)) => {
            let comparison = compare(baseline, focused)?;
            let table = render_comparison_table(&comparison);
            write_json(
                &reports_dir.join("comparison.json"),
                &ReportFile { config: config_snapshot.to_string(), report: &comparison },
            )?;
            let txt = reports_dir.join("comparison.txt");
            fs::write(&txt, &table).map_err(|source| HarnessError::Io { path: txt, source })?;
            (Some(comparison), Some(table))
        }
        _ => (None, None),
    };
    Ok(BenchOutcome { reports, comparison, table, episodes: episodes_run })
}
