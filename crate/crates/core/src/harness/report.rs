//! Per-mode aggregates and the two-mode comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dataset::TaskRecord;
use super::metrics::{exact_match, f1_score, mean_and_sample_std};
use super::HarnessError;
use crate::transcript::{Episode, Mode, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub id: String,
    pub correct: bool,
    pub f1: f64,
    pub final_answer: Option<String>,
    pub gold_answer: String,
    pub termination: Termination,
    pub steps: usize,
    pub wall_total: f64,
    pub model_time: f64,
    pub tool_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub n_tasks: usize,
    pub n_correct: usize,
    /// In [0, 1].
    pub accuracy: f64,
    pub mean_f1: f64,
    /// Seconds, over per-task wall time.
    pub runtime_mean: f64,
    pub runtime_std: f64,
    pub mean_steps: f64,
    pub terminations: BTreeMap<Termination, usize>,
    pub per_task: Vec<TaskOutcome>,
}

impl RunReport {
    pub fn accuracy_percent(&self) -> f64 {
        self.accuracy * 100.0
    }

    pub fn termination_rate(&self, termination: Termination) -> f64 {
        let count = self.terminations.get(&termination).copied().unwrap_or(0);
        count as f64 / self.n_tasks as f64
    }
}

/// Scores episodes against their tasks. Episodes and tasks must be aligned
/// index by index.
pub fn aggregate(episodes: &[Episode], tasks: &[TaskRecord], mode: Mode) -> Result<RunReport, HarnessError> {
    if episodes.is_empty() {
        return Err(HarnessError::InvalidInput("no episodes to aggregate".into()));
    }
    if episodes.len() != tasks.len() {
        return Err(HarnessError::Alignment(format!("{} episodes for {} tasks", episodes.len(), tasks.len())));
    }
    let mut per_task = Vec::with_capacity(tasks.len());
    let mut terminations = BTreeMap::new();
    for (index, (episode, task)) in episodes.iter().zip(tasks).enumerate() {
        if episode.id != task.id {
            return Err(HarnessError::Alignment(format!(
                "position {index}: episode `{}` vs task `{}`",
                episode.id, task.id
            )));
        }
        if episode.mode != mode {
            return Err(HarnessError::Alignment(format!(
                "episode `{}` ran in {} mode, expected {mode}",
                episode.id, episode.mode
            )));
        }
        let answer = episode.final_answer.as_deref();
        *terminations.entry(episode.termination).or_insert(0) += 1;
        per_task.push(TaskOutcome {
            id: task.id.clone(),
            correct: answer.is_some_and(|a| exact_match(a, &task.gold_answer)),
            f1: answer.map_or(0.0, |a| f1_score(a, &task.gold_answer)),
            final_answer: episode.final_answer.clone(),
            gold_answer: task.gold_answer.clone(),
            termination: episode.termination,
            steps: episode.steps.len(),
            wall_total: episode.timing.wall_total,
            model_time: episode.timing.model_time,
            tool_time: episode.timing.tool_time,
        });
    }
    let n_tasks = per_task.len();
    let n_correct = per_task.iter().filter(|t| t.correct).count();
    let runtimes: Vec<f64> = per_task.iter().map(|t| t.wall_total).collect();
    let (runtime_mean, runtime_std) = mean_and_sample_std(&runtimes);
    Ok(RunReport {
        mode,
        n_tasks,
        n_correct,
        accuracy: n_correct as f64 / n_tasks as f64,
        mean_f1: per_task.iter().map(|t| t.f1).sum::<f64>() / n_tasks as f64,
        runtime_mean,
        runtime_std,
        mean_steps: per_task.iter().map(|t| t.steps as f64).sum::<f64>() / n_tasks as f64,
        terminations,
        per_task,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: RunReport,
    pub focused: RunReport,
    /// Percentage points, focused minus baseline.
    pub accuracy_abs_diff: f64,
    /// Percent improvement over the baseline, rounded to an integer. `None`
    /// when the baseline accuracy is zero.
    pub accuracy_rel_diff: Option<i64>,
    /// Seconds, focused minus baseline (negative when focused is faster).
    pub runtime_abs_diff: f64,
    /// Percent reduction relative to the baseline, rounded to an integer.
    /// `None` when the baseline runtime is zero.
    pub runtime_rel_diff: Option<i64>,
}

/// `(focused - baseline, round(100 * (focused - baseline) / baseline))` with
/// both accuracies in percent.
pub fn accuracy_diff(baseline_pct: f64, focused_pct: f64) -> (f64, Option<i64>) {
    let abs = focused_pct - baseline_pct;
    let rel = (baseline_pct != 0.0).then(|| (100.0 * abs / baseline_pct).round() as i64);
    (abs, rel)
}

/// `(focused - baseline, round(100 * (baseline - focused) / baseline))`, the
/// relative part being a reduction.
pub fn runtime_diff(baseline_s: f64, focused_s: f64) -> (f64, Option<i64>) {
    let abs = focused_s - baseline_s;
    let rel = (baseline_s != 0.0).then(|| (100.0 * -abs / baseline_s).round() as i64);
    (abs, rel)
}

pub fn compare(baseline: &RunReport, focused: &RunReport) -> Result<ComparisonReport, HarnessError> {
    let ids = |r: &RunReport| r.per_task.iter().map(|t| t.id.clone()).collect::<Vec<_>>();
    if ids(baseline) != ids(focused) {
        return Err(HarnessError::Alignment("reports cover different task sets".into()));
    }
    let (accuracy_abs_diff, accuracy_rel_diff) = accuracy_diff(baseline.accuracy_percent(), focused.accuracy_percent());
    let (runtime_abs_diff, runtime_rel_diff) = runtime_diff(baseline.runtime_mean, focused.runtime_mean);
    Ok(ComparisonReport {
        baseline: baseline.clone(),
        focused: focused.clone(),
        accuracy_abs_diff,
        accuracy_rel_diff,
        runtime_abs_diff,
        runtime_rel_diff,
    })
}

/// Keys whose values depend on wall-clock time.
pub const TIMING_FIELDS: [&str; 7] =
    ["runtime_mean", "runtime_std", "runtime_abs_diff", "runtime_rel_diff", "wall_total", "model_time", "tool_time"];

/// Removes every [`TIMING_FIELDS`] key, at any depth, from a serialized report
/// so that two runs can be compared byte for byte.
pub fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|key, _| !TIMING_FIELDS.contains(&key.as_str()));
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn rel_cell(rel: Option<i64>) -> String {
    rel.map_or_else(|| "n/a".to_string(), |r| format!("{r}%"))
}

fn table(rows: &[[String; 4]]) -> String {
    let mut widths = [0usize; 4];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
        }
    }
    out
}

/// Accuracy and runtime rows in the layout of the published comparison.
pub fn render_comparison_table(report: &ComparisonReport) -> String {
    let b = &report.baseline;
    let f = &report.focused;
    let rows = [
        ["Metric".into(), "ReAct".into(), "Focused ReAct".into(), "abs./rel. diff".into()],
        [
            "Accuracy".into(),
            format!("{:.1}%", b.accuracy_percent()),
            format!("{:.1}%", f.accuracy_percent()),
            format!("{:+.1} / {}", report.accuracy_abs_diff, rel_cell(report.accuracy_rel_diff)),
        ],
        [
            "Runtime".into(),
            format!("{:.2}±{:.2}s", b.runtime_mean, b.runtime_std),
            format!("{:.2}±{:.2}s", f.runtime_mean, f.runtime_std),
            format!("{:+.2} / {}", report.runtime_abs_diff, rel_cell(report.runtime_rel_diff)),
        ],
    ];
    let mut out = table(&rows);
    let _ = writeln!(
        out,
        "tasks: {}; early stops (focused): {:.1}%; mean steps: {:.2} vs {:.2}",
        b.n_tasks,
        100.0 * f.termination_rate(Termination::EarlyStopForced),
        b.mean_steps,
        f.mean_steps
    );
    out
}

pub fn render_run_summary(report: &RunReport) -> String {
    let terminations: Vec<String> = report.terminations.iter().map(|(t, n)| format!("{t}={n}")).collect();
    format!(
        "{}: {}/{} correct ({:.1}%), F1 {:.3}, runtime {:.2}±{:.2}s, mean steps {:.2}, {}\n",
        report.mode,
        report.n_correct,
        report.n_tasks,
        report.accuracy_percent(),
        report.mean_f1,
        report.runtime_mean,
        report.runtime_std,
        report.mean_steps,
        terminations.join(" ")
    )
}
