//! The episode loop.
//!
//! Each round: build the prompt, ask the backend for a thought and action,
//! then either finish, execute the tool and append its observation, or (in
//! focused mode) stop early when the action repeats an earlier one and ask
//! the model for an answer from what it has already seen.

use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{CompletionRequest, LlmBackend};
use crate::prompting::{
    build_base_prompt, build_forced_answer_prompt, build_round_prompt, render_transcript, FewShotSet, PromptError,
    PromptPlan,
};
use crate::tools::{Toolset, SEARCH_FAILED_OBSERVATION};
use crate::transcript::{
    normalize_action, parse_action, parse_model_block, prompt_digest, Action, Episode, ForcedAnswer, Mode,
    ParsedAction, Step, Termination, Timing,
};

pub const INVALID_ACTION_OBSERVATION: &str =
    "Invalid action. Valid actions are Search[entity], Lookup[keyword], Finish[answer].";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("invalid engine config: {0}")]
    Config(String),
    #[error("prompt plan is for {plan} mode but the engine runs {engine} mode")]
    ModeMismatch { plan: Mode, engine: Mode },
}

/// Which earlier actions a new action is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateScope {
    #[default]
    AllPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub max_rounds: u32,
    /// Malformed rounds tolerated; the next one ends the episode.
    pub malformed_budget: u32,
    pub mode: Mode,
    pub duplicate_scope: DuplicateScope,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { max_rounds: 8, malformed_budget: 2, mode: Mode::Focused, duplicate_scope: DuplicateScope::AllPrior }
    }
}

impl EngineConfig {
    pub fn new(mode: Mode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_rounds < 1 {
            return Err(EngineError::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// True when `candidate` is a non-Finish action whose normalized key matches
/// some earlier well-formed non-Finish action.
pub fn detect_duplicate(prior: &[Action], candidate: &Action) -> bool {
    if candidate.is_finish() {
        return false;
    }
    let key = normalize_action(candidate);
    prior.iter().filter(|p| !p.is_finish()).any(|p| normalize_action(p) == key)
}

struct EpisodeState<'a> {
    id: &'a str,
    question: &'a str,
    mode: Mode,
    started: Instant,
    steps: Vec<Step>,
    model_time: f64,
    tool_time: f64,
}

impl EpisodeState<'_> {
    fn finish(
        self,
        termination: Termination,
        final_answer: Option<String>,
        forced_answer: Option<ForcedAnswer>,
        error: Option<String>,
    ) -> Episode {
        let timing = Timing {
            wall_total: self.started.elapsed().as_secs_f64(),
            model_time: self.model_time,
            tool_time: self.tool_time,
        };
        Episode {
            id: self.id.to_string(),
            question: self.question.to_string(),
            mode: self.mode,
            steps: self.steps,
            final_answer,
            termination,
            timing,
            forced_answer,
            error,
        }
    }
}

/// Runs one question to termination. Backend failures end the episode with
/// [`Termination::BackendError`] rather than returning an error; `Err` is
/// reserved for invalid inputs.
pub fn run_episode(
    id: &str,
    question: &str,
    cfg: &EngineConfig,
    backend: &dyn LlmBackend,
    tools: &mut Toolset,
    plan: &PromptPlan,
    fewshot: &FewShotSet,
) -> Result<Episode, EngineError> {
    cfg.validate()?;
    if plan.mode() != cfg.mode {
        return Err(EngineError::ModeMismatch { plan: plan.mode(), engine: cfg.mode });
    }
    let question = question.trim();
    let base = build_base_prompt(fewshot, question)?;
    let focused = cfg.mode == Mode::Focused;
    let mut state = EpisodeState {
        id,
        question,
        mode: cfg.mode,
        started: Instant::now(),
        steps: Vec::new(),
        model_time: 0.0,
        tool_time: 0.0,
    };
    let mut prior: Vec<Action> = Vec::new();
    let mut malformed = 0u32;

    for round in 1..=cfg.max_rounds {
        let transcript = render_transcript(plan, &state.steps, question);
        let prompt = build_round_prompt(plan, &base, &transcript, round, question)?;
        let request = request_for(plan, prompt.clone());
        let response = match backend.complete(&request) {
            Ok(response) => response,
            Err(error) => {
                warn!("episode {id}: backend failed in round {round}: {error}");
                return Ok(state.finish(Termination::BackendError, None, None, Some(error.to_string())));
            }
        };
        state.model_time += response.latency;

        let block = parse_model_block(&response.text);
        let action = match &block.action_line {
            Some(line) => parse_action(line),
            None => ParsedAction::Malformed(String::new()),
        };
        let mut step = Step {
            index: round,
            thought: block.thought,
            key: action.as_valid().map(normalize_action),
            action,
            observation: None,
            reiterated: focused,
            prompt_digest: prompt_digest(&prompt),
            prompt: Some(prompt),
            raw_generation: response.text,
        };

        match step.action.clone() {
            ParsedAction::Valid(action) if action.is_finish() => {
                state.steps.push(step);
                let answer = action.argument().to_string();
                return Ok(state.finish(Termination::Finished, Some(answer), None, None));
            }
            ParsedAction::Valid(action) if focused && detect_duplicate(&prior, &action) => {
                debug!("episode {id}: repeated {action} in round {round}; requesting an answer");
                state.steps.push(step);
                return Ok(force_answer(state, Termination::EarlyStopForced, backend, plan, &base));
            }
            ParsedAction::Valid(action) => {
                let started = Instant::now();
                let observation = match tools.execute(&action) {
                    Ok(response) => response.observation,
                    Err(error) => {
                        warn!("episode {id}: {action} failed: {error}");
                        SEARCH_FAILED_OBSERVATION.to_string()
                    }
                };
                state.tool_time += started.elapsed().as_secs_f64();
                step.observation = Some(observation);
                state.steps.push(step);
                prior.push(action);
            }
            ParsedAction::Malformed(_) => {
                malformed += 1;
                step.observation = Some(INVALID_ACTION_OBSERVATION.to_string());
                state.steps.push(step);
                if malformed > cfg.malformed_budget {
                    return Ok(state.finish(Termination::MalformedBudgetExceeded, None, None, None));
                }
            }
        }
    }

    if focused {
        Ok(force_answer(state, Termination::StepCapReached, backend, plan, &base))
    } else {
        Ok(state.finish(Termination::StepCapReached, None, None, None))
    }
}

fn request_for(plan: &PromptPlan, prompt: String) -> CompletionRequest {
    CompletionRequest {
        prompt,
        system: None,
        stop: plan.stop_sequences().to_vec(),
        max_new_tokens: plan.max_new_tokens(),
        temperature: plan.temperature(),
    }
}

fn force_answer(
    mut state: EpisodeState<'_>,
    termination: Termination,
    backend: &dyn LlmBackend,
    plan: &PromptPlan,
    base: &str,
) -> Episode {
    let transcript = render_transcript(plan, &state.steps, state.question);
    let prompt = build_forced_answer_prompt(plan, base, &transcript, state.question);
    let digest = prompt_digest(&prompt);
    match backend.complete(&request_for(plan, prompt.clone())) {
        Ok(response) => {
            state.model_time += response.latency;
            let answer = response.text.trim().to_string();
            let forced = ForcedAnswer { prompt: Some(prompt), prompt_digest: digest, raw_generation: response.text };
            let answer = (!answer.is_empty()).then_some(answer);
            state.finish(termination, answer, Some(forced), None)
        }
        Err(error) => {
            warn!("episode {}: forced-answer request failed: {error}", state.id);
            state.finish(Termination::BackendError, None, None, Some(format!("forced answer: {error}")))
        }
    }
}
