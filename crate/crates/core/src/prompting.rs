//! Prompt assembly for each round.
//!
//! A prompt is `base + transcript + cue`, where `base` is the instruction
//! preamble, the few-shot trajectories and the `Question:` header. In focused
//! mode a reiteration line restating the question is placed immediately
//! before every `Thought N:` cue, and those lines stay in the transcript for
//! later rounds.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::{parse_action, Mode, ParsedAction, Step};

pub const QUESTION_PLACEHOLDER: &str = "{question}";
pub const DEFAULT_REITERATION_TEMPLATE: &str = "(Original question: {question})";
pub const DEFAULT_FORCED_ANSWER_TEMPLATE: &str = "You have gathered enough information. Based on the observations above, answer the original question: {question}\nAnswer:";
pub const DEFAULT_STOP_SEQUENCE: &str = "\nObservation";
pub const DEFAULT_MAX_NEW_TOKENS: u32 = 256;

/// Separates the preamble and the examples in a few-shot file.
const FEWSHOT_SEPARATOR: &str = "---";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("template `{name}` must contain exactly one {QUESTION_PLACEHOLDER} placeholder, found {found}")]
    Template { name: &'static str, found: usize },
    #[error("few-shot example {index} is invalid: {reason}")]
    FewShot { index: usize, reason: String },
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotSet {
    preamble: String,
    examples: Vec<String>,
}

impl FewShotSet {
    /// Builds a set, checking that every example is a complete trajectory
    /// under the action grammar.
    pub fn new(preamble: impl Into<String>, examples: Vec<String>) -> Result<Self, PromptError> {
        let examples: Vec<String> = examples.into_iter().map(|e| e.trim().to_string()).collect();
        for (index, example) in examples.iter().enumerate() {
            validate_example(example).map_err(|reason| PromptError::FewShot { index, reason })?;
        }
        Ok(Self { preamble: preamble.into().trim().to_string(), examples })
    }

    /// Parses the plain-text few-shot format: blocks separated by lines that
    /// contain only `---`. The first block is the preamble.
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let mut blocks = vec![String::new()];
        for line in text.lines() {
            if line.trim() == FEWSHOT_SEPARATOR {
                blocks.push(String::new());
            } else {
                let block = blocks.last_mut().expect("at least one block");
                block.push_str(line);
                block.push('\n');
            }
        }
        let preamble = blocks.remove(0);
        let examples = blocks.into_iter().filter(|b| !b.trim().is_empty()).collect();
        Self::new(preamble, examples)
    }

    pub fn load(path: &Path) -> Result<Self, PromptError> {
        let text =
            fs::read_to_string(path).map_err(|source| PromptError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn preamble(&self) -> &str {
        &self.preamble
    }

    pub fn examples(&self) -> &[String] {
        &self.examples
    }
}

impl Default for FewShotSet {
    fn default() -> Self {
        Self::parse(DEFAULT_FEWSHOT).expect("built-in few-shot set is valid")
    }
}

fn validate_example(example: &str) -> Result<(), String> {
    let mut lines = example.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some(first) if first.starts_with("Question:") => {}
        _ => return Err("must start with a `Question:` line".into()),
    }
    let mut last_action = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("Action") {
            let Some((_, action)) = rest.split_once(':') else {
                return Err(format!("action line without cue: {line}"));
            };
            match parse_action(action) {
                ParsedAction::Valid(action) => last_action = Some(action),
                ParsedAction::Malformed(raw) => return Err(format!("malformed action `{}`", raw.trim())),
            }
        }
    }
    match last_action {
        Some(action) if action.is_finish() => Ok(()),
        Some(_) => Err("must end with a Finish action".into()),
        None => Err("contains no actions".into()),
    }
}

/// Serializable prompt knobs, as they appear in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSettings {
    pub reiteration_template: String,
    pub forced_answer_template: String,
    pub stop_sequences: Vec<String>,
    pub max_new_tokens: u32,
    pub temperature: f64,
}

impl Default for PromptSettings {
    fn default() -> Self {
        Self {
            reiteration_template: DEFAULT_REITERATION_TEMPLATE.into(),
            forced_answer_template: DEFAULT_FORCED_ANSWER_TEMPLATE.into(),
            stop_sequences: vec![DEFAULT_STOP_SEQUENCE.into()],
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            temperature: 0.0,
        }
    }
}

/// Validated prompt configuration for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPlan {
    mode: Mode,
    settings: PromptSettings,
}

impl PromptPlan {
    pub fn new(mode: Mode, settings: PromptSettings) -> Result<Self, PromptError> {
        check_template("reiteration_template", &settings.reiteration_template)?;
        check_template("forced_answer_template", &settings.forced_answer_template)?;
        if settings.stop_sequences.is_empty() || settings.stop_sequences.iter().any(String::is_empty) {
            return Err(PromptError::InvalidInput("stop_sequences must be non-empty".into()));
        }
        if settings.max_new_tokens == 0 {
            return Err(PromptError::InvalidInput("max_new_tokens must be at least 1".into()));
        }
        if settings.temperature.is_nan() || settings.temperature < 0.0 {
            return Err(PromptError::InvalidInput("temperature must be non-negative".into()));
        }
        Ok(Self { mode, settings })
    }

    pub fn with_defaults(mode: Mode) -> Self {
        Self::new(mode, PromptSettings::default()).expect("default prompt settings are valid")
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn settings(&self) -> &PromptSettings {
        &self.settings
    }

    pub fn stop_sequences(&self) -> &[String] {
        &self.settings.stop_sequences
    }

    pub fn max_new_tokens(&self) -> u32 {
        self.settings.max_new_tokens
    }

    pub fn temperature(&self) -> f64 {
        self.settings.temperature
    }

    pub fn reiteration_line(&self, question: &str) -> String {
        self.settings.reiteration_template.replacen(QUESTION_PLACEHOLDER, question, 1)
    }

    fn reiterates(&self) -> bool {
        self.mode == Mode::Focused
    }
}

fn check_template(name: &'static str, template: &str) -> Result<(), PromptError> {
    match template.matches(QUESTION_PLACEHOLDER).count() {
        1 => Ok(()),
        found => Err(PromptError::Template { name, found }),
    }
}

/// Preamble, few-shot examples and the `Question:` header.
pub fn build_base_prompt(fewshot: &FewShotSet, question: &str) -> Result<String, PromptError> {
    let question = question.trim();
    if question.is_empty() {
        return Err(PromptError::InvalidInput("question is empty".into()));
    }
    let mut out = String::new();
    if !fewshot.preamble.is_empty() {
        out.push_str(&fewshot.preamble);
        out.push_str("\n\n");
    }
    for example in &fewshot.examples {
        out.push_str(example);
        out.push_str("\n\n");
    }
    out.push_str("Question: ");
    out.push_str(question);
    out.push('\n');
    Ok(out)
}

/// The first-round prompt without reiteration.
pub fn build_initial_prompt(fewshot: &FewShotSet, question: &str) -> Result<String, PromptError> {
    let mut out = build_base_prompt(fewshot, question)?;
    out.push_str("Thought 1:");
    Ok(out)
}

pub fn build_round_prompt(
    plan: &PromptPlan,
    base: &str,
    transcript: &str,
    round: u32,
    question: &str,
) -> Result<String, PromptError> {
    if round < 1 {
        return Err(PromptError::InvalidInput("round numbers start at 1".into()));
    }
    let mut out = String::with_capacity(base.len() + transcript.len() + 64);
    out.push_str(base);
    out.push_str(transcript);
    if plan.reiterates() {
        out.push_str(&plan.reiteration_line(question));
        out.push('\n');
    }
    out.push_str(&format!("Thought {round}:"));
    Ok(out)
}

pub fn build_forced_answer_prompt(plan: &PromptPlan, base: &str, transcript: &str, question: &str) -> String {
    let instruction = plan.settings.forced_answer_template.replacen(QUESTION_PLACEHOLDER, question, 1);
    let mut out = String::with_capacity(base.len() + transcript.len() + instruction.len());
    out.push_str(base);
    out.push_str(transcript);
    out.push_str(&instruction);
    out
}

/// Renders one completed step in the exact form it re-enters later prompts.
pub fn render_step(plan: &PromptPlan, step: &Step, question: &str) -> String {
    let mut out = String::new();
    if step.reiterated {
        out.push_str(&plan.reiteration_line(question));
        out.push('\n');
    }
    out.push_str(&format!("Thought {}:", step.index));
    if !step.thought.is_empty() {
        out.push(' ');
        out.push_str(&step.thought);
    }
    out.push_str(&format!("\nAction {}: {}\n", step.index, step.action.render()));
    if let Some(observation) = &step.observation {
        out.push_str(&format!("Observation {}: {}\n", step.index, observation));
    }
    out
}

pub fn render_transcript(plan: &PromptPlan, steps: &[Step], question: &str) -> String {
    steps.iter().map(|step| render_step(plan, step, question)).collect()
}

const DEFAULT_FEWSHOT: &str = "\
Solve a question answering task with interleaving Thought, Action, Observation steps. Thought can reason about the current situation, and Action can be three types:
(1) Search[entity], which searches the exact entity on Wikipedia and returns the first paragraph if it exists. If not, it will return some similar entities to search.
(2) Lookup[keyword], which returns the next sentence containing keyword in the current passage.
(3) Finish[answer], which returns the answer and finishes the task.
Here are some examples.
---
Question: Which magazine was started first, Arthur's Magazine or First for Women?
Thought 1: I need to search Arthur's Magazine and First for Women, and find which was started first.
Action 1: Search[Arthur's Magazine]
Observation 1: Arthur's Magazine (1844-1846) was an American literary periodical published in Philadelphia in the 19th century.
Thought 2: Arthur's Magazine was started in 1844. I need to search First for Women next.
Action 2: Search[First for Women]
Observation 2: First for Women is a woman's magazine published by Bauer Media Group in the USA. The magazine was started in 1989.
Thought 3: First for Women was started in 1989. 1844 is earlier than 1989, so Arthur's Magazine was started first.
Action 3: Finish[Arthur's Magazine]
---
Question: Were Pavel Urysohn and Leonid Levin known for the same type of work?
Thought 1: I need to search Pavel Urysohn and Leonid Levin, find their types of work, then check if they are the same.
Action 1: Search[Pavel Urysohn]
Observation 1: Pavel Samuilovich Urysohn (February 3, 1898 - August 17, 1924) was a Soviet mathematician who is best known for his contributions in dimension theory.
Thought 2: Pavel Urysohn is a mathematician. I need to search Leonid Levin next and find its type of work.
Action 2: Search[Leonid Levin]
Observation 2: Leonid Anatolievich Levin is a Soviet-American mathematician and computer scientist.
Thought 3: Leonid Levin is a mathematician and computer scientist. So Pavel Urysohn and Leonid Levin have the same type of work.
Action 3: Finish[yes]
---
Question: In what year was the university where Alan Turing earned his doctorate founded?
Thought 1: I need to find where Alan Turing earned his doctorate, then find when that university was founded.
Action 1: Search[Alan Turing]
Observation 1: Alan Mathison Turing (23 June 1912 - 7 June 1954) was an English mathematician, computer scientist, logician, cryptanalyst, philosopher and theoretical biologist.
Thought 2: The summary does not mention his doctorate. I can look up the keyword PhD.
Action 2: Lookup[PhD]
Observation 2: (Result 1/1) From September 1936 to July 1938, Turing spent most of his time studying under Alonzo Church at Princeton University, and received his PhD in 1938.
Thought 3: Turing earned his PhD at Princeton University. I need to search Princeton University and find its founding year.
Action 3: Search[Princeton University]
Observation 3: Princeton University is a private Ivy League research university in Princeton, New Jersey. Founded in 1746 in Elizabeth as the College of New Jersey, Princeton is the fourth-oldest institution of higher education in the United States.
Thought 4: Princeton University was founded in 1746.
Action 4: Finish[1746]
";
