use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use focused_react::backend::ApiShape;
use focused_react::config::{BackendKind, RunConfig, Runtime, ToolSourceKind};
use focused_react::engine::run_episode;
use focused_react::harness::{
    compare, load_dataset, render_comparison_table, render_run_summary, run_bench, sample_tasks, BenchOptions,
    DatasetFormat, ReportFile, RunReport,
};
use focused_react::prompting::PromptPlan;
use focused_react::tools::{record_fixture, FixtureSource, KnowledgeSource, WikipediaSource};
use focused_react::trace::{detect_action_loops, load_episodes, save_episodes, summarize_failures, TraceDetail};
use focused_react::transcript::{Action, Episode, Mode, Termination};

const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "focused-react", version, about = "ReAct question answering with an optional focused mode")]
struct Cli {
    /// TOML run configuration. Flags override environment, which overrides the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More logging; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Answer one question and write its trace.
    Run(RunArgs),
    /// Run a sampled dataset under each mode and compare them.
    Bench(BenchArgs),
    /// Compare two saved run reports.
    Compare(CompareArgs),
    /// Summarize failure modes in a trace file.
    Analyze(AnalyzeArgs),
    /// Execute actions against the live source and save their results as a fixture.
    RecordFixture(RecordArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendFlag {
    Http,
    Scripted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ToolsFlag {
    Wikipedia,
    Fixture,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShapeFlag {
    Chat,
    Completions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeFlag {
    Vanilla,
    Focused,
}

impl From<ModeFlag> for Mode {
    fn from(flag: ModeFlag) -> Self {
        match flag {
            ModeFlag::Vanilla => Mode::Vanilla,
            ModeFlag::Focused => Mode::Focused,
        }
    }
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long, value_enum)]
    backend: Option<BackendFlag>,
    /// Script file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible server.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent to the server.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum)]
    api_shape: Option<ShapeFlag>,
    #[arg(long, value_enum)]
    tools: Option<ToolsFlag>,
    /// Fixture file for the fixture tool source.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Search cache file, loaded before and saved after the run.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Few-shot examples file; built-in examples otherwise.
    #[arg(long)]
    fewshot: Option<PathBuf>,
    /// Maximum Thought/Action rounds per episode.
    #[arg(long)]
    max_rounds: Option<u32>,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(backend) = self.backend {
            config.backend.kind = match backend {
                BackendFlag::Http => BackendKind::Http,
                BackendFlag::Scripted => BackendKind::Scripted,
            };
        }
        if let Some(script) = &self.script {
            config.backend.script = Some(script.clone());
            if self.backend.is_none() {
                config.backend.kind = BackendKind::Scripted;
            }
        }
        if let Some(endpoint) = &self.endpoint {
            config.backend.http.endpoint = endpoint.clone();
        }
        if let Some(model) = &self.model {
            config.backend.http.model = model.clone();
        }
        if let Some(shape) = self.api_shape {
            config.backend.http.api_shape = match shape {
                ShapeFlag::Chat => ApiShape::Chat,
                ShapeFlag::Completions => ApiShape::Completions,
            };
        }
        if let Some(tools) = self.tools {
            config.tools.source = match tools {
                ToolsFlag::Wikipedia => ToolSourceKind::Wikipedia,
                ToolsFlag::Fixture => ToolSourceKind::Fixture,
            };
        }
        if let Some(fixture) = &self.fixture {
            config.tools.fixture = Some(fixture.clone());
            if self.tools.is_none() {
                config.tools.source = ToolSourceKind::Fixture;
            }
        }
        if let Some(cache) = &self.cache {
            config.tools.cache = true;
            config.tools.cache_path = Some(cache.clone());
        }
        if let Some(fewshot) = &self.fewshot {
            config.fewshot_path = Some(fewshot.clone());
        }
        if let Some(max_rounds) = self.max_rounds {
            config.engine.max_rounds = max_rounds;
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Question to answer.
    #[arg(long)]
    question: String,
    /// Agent mode (default from config: focused).
    #[arg(long, value_enum)]
    mode: Option<ModeFlag>,
    /// Defaults to runs/run-<unix time>.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Store prompt digests instead of full prompts.
    #[arg(long)]
    slim: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// HotPotQA JSON array or JSONL task file.
    #[arg(long)]
    dataset: PathBuf,
    /// hotpot-json or simple-jsonl; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// Tasks to sample.
    #[arg(long)]
    n: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated modes.
    #[arg(long, value_enum, value_delimiter = ',')]
    modes: Option<Vec<ModeFlag>>,
    /// Defaults to runs/bench-<unix time>.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Episodes run in parallel.
    #[arg(long)]
    concurrency: Option<usize>,
    #[arg(long)]
    slim: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Vanilla-mode report file.
    baseline: PathBuf,
    /// Focused-mode report file.
    focused: PathBuf,
    /// Also write comparison.json and comparison.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    trace: PathBuf,
}

#[derive(Debug, Args)]
struct RecordArgs {
    /// File with one action per line, e.g. `Search[Milhaven]`.
    #[arg(long)]
    actions: Option<PathBuf>,
    /// An action to record; may be repeated.
    #[arg(long = "action")]
    action: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

/// Bad invocation detected after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let _ = error.print();
            return if error.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error:#}");
            if error.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run(args) => cmd_run(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Compare(args) => cmd_compare(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::RecordFixture(args) => cmd_record(cli, args),
    }
}

fn load_config(cli: &Cli, overrides: &Overrides) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    config.apply_env(|name| std::env::var(name).ok()).map_err(|e| usage(e.to_string()))?;
    overrides.apply(&mut config);
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn build_runtime(config: &RunConfig) -> Result<Runtime> {
    use focused_react::config::ConfigError;
    Runtime::from_config(config).map_err(|e| match e {
        ConfigError::Missing(_) | ConfigError::InvalidValue { .. } => usage(e.to_string()),
        other => anyhow::Error::new(other).context("cannot set up the run"),
    })
}

fn default_run_dir(prefix: &str) -> PathBuf {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or_default();
    PathBuf::from("runs").join(format!("{prefix}-{secs}"))
}

fn detail(slim: bool) -> TraceDetail {
    if slim {
        TraceDetail::Slim
    } else {
        TraceDetail::Full
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn exit_code(termination: Termination) -> u8 {
    match termination {
        Termination::Finished | Termination::EarlyStopForced => 0,
        Termination::StepCapReached | Termination::MalformedBudgetExceeded => 2,
        Termination::BackendError => 3,
    }
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<u8> {
    if args.question.trim().is_empty() {
        return Err(usage("--question must not be empty"));
    }
    let mut config = load_config(cli, &args.overrides)?;
    if let Some(mode) = args.mode {
        config.engine.mode = mode.into();
    }
    let runtime = build_runtime(&config)?;
    let mode = config.engine.mode;
    let plan = PromptPlan::new(mode, runtime.prompts.clone())?;
    let backend = runtime.backends.for_episode("run", mode);
    let mut tools = runtime.tools.toolset();
    let episode =
        run_episode("run", &args.question, &runtime.engine, backend.as_ref(), &mut tools, &plan, &runtime.fewshot)?;
    runtime.tools.persist_cache()?;

    let run_dir = args.run_dir.clone().unwrap_or_else(|| default_run_dir("run"));
    write_file(&run_dir.join("config.toml"), &config.to_toml())?;
    let trace = run_dir.join("traces").join(format!("{mode}.jsonl"));
    fs::create_dir_all(run_dir.join("traces")).with_context(|| format!("creating {}", run_dir.display()))?;
    save_episodes(std::slice::from_ref(&episode), &trace, detail(args.slim))?;

    print!("{}", describe_episode(&episode));
    println!("trace: {}", trace.display());
    Ok(exit_code(episode.termination))
}

fn describe_episode(episode: &Episode) -> String {
    let mut out = String::new();
    for step in &episode.steps {
        let _ = writeln!(out, "{:>2}. {}", step.index, step.action.render());
        if let Some(observation) = &step.observation {
            let short: String = observation.chars().take(100).collect();
            let ellipsis = if short.len() < observation.len() { "..." } else { "" };
            let _ = writeln!(out, "    -> {short}{ellipsis}");
        }
    }
    let _ = writeln!(out, "termination: {}", episode.termination);
    if let Some(error) = &episode.error {
        let _ = writeln!(out, "error: {error}");
    }
    let _ = writeln!(out, "answer: {}", episode.final_answer.as_deref().unwrap_or("(none)"));
    let _ = writeln!(
        out,
        "time: {:.2}s total, {:.2}s model, {:.2}s tools",
        episode.timing.wall_total, episode.timing.model_time, episode.timing.tool_time
    );
    out
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<u8> {
    let mut config = load_config(cli, &args.overrides)?;
    if let Some(n) = args.n {
        config.bench.n = n;
    }
    if let Some(seed) = args.seed {
        config.bench.seed = seed;
    }
    if let Some(modes) = &args.modes {
        config.bench.modes = modes.iter().map(|&m| m.into()).collect();
    }
    if let Some(concurrency) = args.concurrency {
        config.bench.concurrency = concurrency;
    }
    if args.slim {
        config.bench.trace_detail = TraceDetail::Slim;
    }
    if config.bench.modes.is_empty() {
        return Err(usage("--modes must name at least one mode"));
    }
    if config.bench.n == 0 {
        return Err(usage("--n must be at least 1"));
    }

    let format = match &args.format {
        Some(name) => name.parse::<DatasetFormat>().map_err(|e| usage(e.to_string()))?,
        None => DatasetFormat::for_path(&args.dataset),
    };
    let dataset = load_dataset(&args.dataset, format)?;
    if config.bench.n > dataset.records.len() {
        return Err(usage(format!(
            "--n {} exceeds the {} usable tasks in {}",
            config.bench.n,
            dataset.records.len(),
            args.dataset.display()
        )));
    }
    let tasks = sample_tasks(&dataset.records, config.bench.n, config.bench.seed)?;
    let runtime = build_runtime(&config)?;
    let run_dir = args.run_dir.clone().unwrap_or_else(|| default_run_dir("bench"));
    let options = BenchOptions {
        modes: config.bench.modes.clone(),
        concurrency: config.bench.concurrency,
        trace_detail: config.bench.trace_detail,
    };
    info!("running {} tasks under {:?} into {}", tasks.len(), options.modes, run_dir.display());
    let outcome = run_bench(&runtime, &tasks, &options, &run_dir, &config.to_toml())?;

    for report in &outcome.reports {
        print!("{}", render_run_summary(report));
    }
    if let Some(table) = &outcome.table {
        println!();
        print!("{table}");
    }
    println!("run directory: {}", run_dir.display());
    Ok(0)
}

fn read_report(path: &Path) -> Result<ReportFile<RunReport>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
}

fn cmd_compare(args: &CompareArgs) -> Result<u8> {
    let baseline = read_report(&args.baseline)?;
    let focused = read_report(&args.focused)?;
    let comparison = compare(&baseline.report, &focused.report)?;
    let table = render_comparison_table(&comparison);
    if let Some(out) = &args.out {
        let file = ReportFile { config: focused.config.clone(), report: &comparison };
        write_file(&out.join("comparison.json"), &(serde_json::to_string_pretty(&file)? + "\n"))?;
        write_file(&out.join("comparison.txt"), &table)?;
    }
    print!("{table}");
    Ok(0)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let episodes = load_episodes(&args.trace).with_context(|| format!("cannot read trace {}", args.trace.display()))?;
    if episodes.is_empty() {
        bail!("trace {} holds no episodes", args.trace.display());
    }
    let summary = summarize_failures(&episodes)?;
    println!("episodes:        {}", summary.episodes);
    println!("loop rate:       {:.3}", summary.loop_rate);
    println!("step-cap rate:   {:.3}", summary.cap_rate);
    println!("malformed rate:  {:.3}", summary.malformed_rate);
    println!("early-stop rate: {:.3}", summary.early_stop_rate);
    let histogram: Vec<String> = summary.step_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    println!("steps histogram: {}", histogram.join(" "));
    println!();

    let rows: Vec<[String; 5]> = episodes
        .iter()
        .map(|episode| {
            let loops: Vec<String> = detect_action_loops(episode)
                .iter()
                .map(|group| {
                    let at: Vec<String> = group.occurrence_indices.iter().map(u32::to_string).collect();
                    format!("{} @ {}", group.key, at.join(","))
                })
                .collect();
            [
                episode.id.clone(),
                episode.mode.to_string(),
                episode.steps.len().to_string(),
                episode.termination.to_string(),
                if loops.is_empty() { "-".into() } else { loops.join("; ") },
            ]
        })
        .collect();
    let header = ["id", "mode", "steps", "termination", "loops"].map(String::from);
    let mut widths = header.each_ref().map(|h| h.len());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    for row in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", cells.join("  ").trim_end());
    }
    Ok(0)
}

fn cmd_record(cli: &Cli, args: &RecordArgs) -> Result<u8> {
    let config = load_config(cli, &args.overrides)?;
    let mut lines: Vec<String> = Vec::new();
    if let Some(path) = &args.actions {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        lines.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    lines.extend(args.action.iter().cloned());
    let actions = lines
        .iter()
        .map(|line| line.parse::<Action>().map_err(|e| usage(format!("`{line}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;

    let source: Arc<dyn KnowledgeSource> = match config.tools.source {
        ToolSourceKind::Wikipedia => Arc::new(WikipediaSource::new(config.tools.wikipedia.clone())?),
        ToolSourceKind::Fixture => {
            let path = config.tools.fixture.as_ref().ok_or_else(|| usage("--fixture is required"))?;
            Arc::new(FixtureSource::load(path)?)
        }
    };
    if let Some(parent) = args.out.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let written = record_fixture(source, &actions, &args.out, config.tools.summary_sentences)?;
    println!("wrote {written} entries to {}", args.out.display());
    Ok(0)
}
