//! Episode data model and the action grammar.
//!
//! Model output for a round is split into a free-text thought and a single
//! action line of the form `Name[argument]`. Only three action names exist:
//! `Search`, `Lookup` and `Finish`. Anything that does not fit the grammar is
//! kept as a [`ParsedAction::Malformed`] value so the engine can decide what
//! to do with it.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("action argument is empty")]
    EmptyArgument,
    #[error("unknown action name `{0}`")]
    UnknownAction(String),
    #[error("unknown mode `{0}` (expected `vanilla` or `focused`)")]
    UnknownMode(String),
    #[error("episode invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionName {
    Search,
    Lookup,
    Finish,
}

impl ActionName {
    pub const ALL: [ActionName; 3] = [ActionName::Search, ActionName::Lookup, ActionName::Finish];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionName::Search => "Search",
            ActionName::Lookup => "Lookup",
            ActionName::Finish => "Finish",
        }
    }

    /// Case-insensitive name lookup.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|candidate| candidate.as_str().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A well-formed tool invocation. The argument never carries outer whitespace
/// and is never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAction")]
pub struct Action {
    name: ActionName,
    argument: String,
}

#[derive(Deserialize)]
struct RawAction {
    name: ActionName,
    argument: String,
}

impl TryFrom<RawAction> for Action {
    type Error = TranscriptError;

    fn try_from(raw: RawAction) -> Result<Self, Self::Error> {
        Action::new(raw.name, raw.argument)
    }
}

impl Action {
    pub fn new(name: ActionName, argument: impl AsRef<str>) -> Result<Self, TranscriptError> {
        let argument = argument.as_ref().trim();
        if argument.is_empty() {
            return Err(TranscriptError::EmptyArgument);
        }
        Ok(Self { name, argument: argument.to_string() })
    }

    pub fn search(entity: impl AsRef<str>) -> Result<Self, TranscriptError> {
        Self::new(ActionName::Search, entity)
    }

    pub fn lookup(keyword: impl AsRef<str>) -> Result<Self, TranscriptError> {
        Self::new(ActionName::Lookup, keyword)
    }

    pub fn finish(answer: impl AsRef<str>) -> Result<Self, TranscriptError> {
        Self::new(ActionName::Finish, answer)
    }

    pub fn name(&self) -> ActionName {
        self.name
    }

    pub fn argument(&self) -> &str {
        &self.argument
    }

    pub fn is_finish(&self) -> bool {
        self.name == ActionName::Finish
    }

    pub fn key(&self) -> NormalizedActionKey {
        normalize_action(self)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.argument)
    }
}

impl FromStr for Action {
    type Err = TranscriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_action(s) {
            ParsedAction::Valid(action) => Ok(action),
            ParsedAction::Malformed(raw) => Err(TranscriptError::UnknownAction(raw)),
        }
    }
}

/// Result of parsing an action line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsedAction {
    Valid(Action),
    /// Raw text that did not match the grammar.
    Malformed(String),
}

impl ParsedAction {
    pub fn as_valid(&self) -> Option<&Action> {
        match self {
            ParsedAction::Valid(action) => Some(action),
            ParsedAction::Malformed(_) => None,
        }
    }

    pub fn is_malformed(&self) -> bool {
        matches!(self, ParsedAction::Malformed(_))
    }

    /// Text as it is rendered after the `Action N:` cue.
    pub fn render(&self) -> String {
        match self {
            ParsedAction::Valid(action) => action.to_string(),
            ParsedAction::Malformed(raw) => raw.clone(),
        }
    }
}

/// Parses `Name[argument]`. The argument runs to the last `]` on the line, so
/// arguments may themselves contain brackets.
pub fn parse_action(raw: &str) -> ParsedAction {
    let malformed = || ParsedAction::Malformed(raw.to_string());
    let line = raw.trim();
    let (Some(open), Some(close)) = (line.find('['), line.rfind(']')) else {
        return malformed();
    };
    if close < open || !line[close + 1..].trim().is_empty() {
        return malformed();
    }
    let Some(name) = ActionName::from_name(line[..open].trim()) else {
        return malformed();
    };
    match Action::new(name, &line[open + 1..close]) {
        Ok(action) => ParsedAction::Valid(action),
        Err(_) => malformed(),
    }
}

/// Equality key for duplicate detection: lowercased name plus the argument
/// lowercased with whitespace runs collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalizedActionKey {
    pub name: String,
    pub argument: String,
}

impl NormalizedActionKey {
    pub fn new(name: &str, argument: &str) -> Self {
        Self {
            name: name.to_lowercase(),
            argument: argument.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase(),
        }
    }
}

impl fmt::Display for NormalizedActionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.name, self.argument)
    }
}

pub fn normalize_action(action: &Action) -> NormalizedActionKey {
    NormalizedActionKey::new(action.name.as_str(), &action.argument)
}

/// One round's generation split at the `Action N:` cue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelBlock {
    pub thought: String,
    pub action_line: Option<String>,
}

fn thought_cue() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*Thought(?:[ \t]+\d+)?[ \t]*:").expect("valid regex"))
}

fn action_cue() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^[ \t]*Action(?:[ \t]+\d+)?[ \t]*:").expect("valid regex"))
}

pub fn parse_model_block(raw: &str) -> ModelBlock {
    let (head, tail) = match action_cue().find(raw) {
        Some(cue) => (&raw[..cue.start()], Some(&raw[cue.end()..])),
        None => (raw, None),
    };
    let thought = match thought_cue().find(head) {
        Some(cue) => &head[cue.end()..],
        None => head,
    };
    let action_line = tail.and_then(|rest| {
        let mut lines = rest.lines().map(str::trim);
        match lines.next() {
            Some(first) if !first.is_empty() => Some(first.to_string()),
            _ => lines.find(|line| !line.is_empty()).map(str::to_string),
        }
    });
    ModelBlock { thought: thought.trim().to_string(), action_line }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vanilla,
    Focused,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Vanilla => "vanilla",
            Mode::Focused => "focused",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = TranscriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vanilla" | "react" => Ok(Mode::Vanilla),
            "focused" => Ok(Mode::Focused),
            _ => Err(TranscriptError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Finished,
    EarlyStopForced,
    StepCapReached,
    BackendError,
    MalformedBudgetExceeded,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Finished => "finished",
            Termination::EarlyStopForced => "early_stop_forced",
            Termination::StepCapReached => "step_cap_reached",
            Termination::BackendError => "backend_error",
            Termination::MalformedBudgetExceeded => "malformed_budget_exceeded",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub wall_total: f64,
    pub model_time: f64,
    pub tool_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// 1-based round number.
    pub index: u32,
    pub thought: String,
    pub action: ParsedAction,
    pub observation: Option<String>,
    /// Whether the round prompt carried the reiteration line before this
    /// step's thought cue.
    pub reiterated: bool,
    /// Full round prompt. `None` in slim traces.
    pub prompt: Option<String>,
    pub prompt_digest: String,
    pub raw_generation: String,
    pub key: Option<NormalizedActionKey>,
}

impl Step {
    pub fn valid_action(&self) -> Option<&Action> {
        self.action.as_valid()
    }
}

/// Hex SHA-256 of a prompt, kept in traces even when the prompt text is not.
pub fn prompt_digest(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The extra generation issued when the engine asks for an answer from the
/// accumulated context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedAnswer {
    pub prompt: Option<String>,
    pub prompt_digest: String,
    pub raw_generation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub question: String,
    pub mode: Mode,
    pub steps: Vec<Step>,
    pub final_answer: Option<String>,
    pub termination: Termination,
    pub timing: Timing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_answer: Option<ForcedAnswer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Episode {
    /// Well-formed actions that are not `Finish`, with their step index.
    pub fn tool_actions(&self) -> impl Iterator<Item = (u32, &Action)> {
        self.steps
            .iter()
            .filter_map(|step| step.valid_action().map(|action| (step.index, action)))
            .filter(|(_, action)| !action.is_finish())
    }

    pub fn has_malformed_step(&self) -> bool {
        self.steps.iter().any(|step| step.action.is_malformed())
    }

    /// Checks the structural invariants every engine-produced episode holds.
    pub fn validate(&self) -> Result<(), TranscriptError> {
        let fail = |msg: String| Err(TranscriptError::Invariant(msg));
        for (position, step) in self.steps.iter().enumerate() {
            if step.index as usize != position + 1 {
                return fail(format!("step at position {position} has index {}", step.index));
            }
        }
        let last = self.steps.len();
        for step in &self.steps {
            let terminal = step.index as usize == last;
            if let Some(action) = step.valid_action() {
                if !action.is_finish() && !terminal && step.observation.is_none() {
                    return fail(format!("non-terminal step {} lacks an observation", step.index));
                }
            }
        }
        if self.termination == Termination::Finished {
            let finished = self.steps.last().and_then(Step::valid_action).is_some_and(Action::is_finish);
            if !finished {
                return fail("finished episode does not end with Finish".into());
            }
        }
        if self.termination == Termination::EarlyStopForced && self.mode != Mode::Focused {
            return fail("early stop in a vanilla episode".into());
        }
        let t = self.timing;
        if t.model_time < 0.0 || t.tool_time < 0.0 || t.wall_total < t.model_time.max(t.tool_time) {
            return fail(format!("inconsistent timing {t:?}"));
        }
        Ok(())
    }
}
