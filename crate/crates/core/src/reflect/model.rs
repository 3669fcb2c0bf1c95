use std::sync::Arc;

use crate::prompts::{builtin, render_actions, MilestoneProfile, PromptRole, PromptSet, PromptText};
use crate::provider::{
    ChatMessage, ChatRole, CompletionRequest, CompletionResponse, Provider, RequestTag, Usage,
};
use crate::score::FitnessScore;
use crate::strategy::{HolisticStrategy, LocalStrategy};
use crate::trace::ExploreTrace;

use super::parse::{match_action, parse_local, parse_score, parse_subgoals, MatchKind};
use super::{
    next_plan, ActionChoice, ParsedScore, ReflectCtx, ReflectError, Reflected, Reflector,
    FALLBACK_SCORE,
};

/// Reflector backed by a completion provider and a prompt set.
#[derive(Clone)]
pub struct LlmReflector {
    provider: Arc<dyn Provider>,
    prompts: Arc<PromptSet>,
    /// Model name and sampling parameters; messages are filled per call.
    request: CompletionRequest,
}

impl LlmReflector {
    pub fn new(provider: Arc<dyn Provider>, prompts: Arc<PromptSet>, model: impl Into<String>) -> Self {
        LlmReflector {
            provider,
            prompts,
            request: CompletionRequest::new(model, Vec::new()),
        }
    }

    /// Overrides sampling parameters; `messages` and `tag` of `request` are ignored.
    pub fn with_request(mut self, request: CompletionRequest) -> Self {
        self.request = request;
        self.request.messages.clear();
        self.request.tag = None;
        self
    }

    pub fn request_template(&self) -> &CompletionRequest {
        &self.request
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    fn call(
        &self,
        messages: Vec<ChatMessage>,
        role: PromptRole,
        step: Option<usize>,
        attempt: u32,
        usage: &mut Usage,
    ) -> Result<CompletionResponse, ReflectError> {
        let mut req = self.request.clone();
        req.messages = messages;
        let req = req.with_tag(RequestTag { role, step, attempt });
        tracing::debug!(tag = %req.tag.unwrap(), "completion request");
        let resp = self.provider.complete(&req)?;
        *usage += resp.usage;
        Ok(resp)
    }

    fn first(
        &self,
        prompt: &PromptText,
        step: Option<usize>,
        usage: &mut Usage,
    ) -> Result<CompletionResponse, ReflectError> {
        self.call(vec![ChatMessage::user(&prompt.rendered)], prompt.role, step, 1, usage)
    }

    fn retry(
        &self,
        prompt: &PromptText,
        previous: &str,
        reminder: String,
        step: Option<usize>,
        usage: &mut Usage,
    ) -> Result<CompletionResponse, ReflectError> {
        let messages = vec![
            ChatMessage::user(&prompt.rendered),
            ChatMessage {
                role: ChatRole::Assistant,
                content: previous.to_string(),
            },
            ChatMessage::user(reminder),
        ];
        self.call(messages, prompt.role, step, 2, usage)
    }

    /// Match, re-prompt once, then fall back to the first valid local candidate.
    fn choose(
        &self,
        prompt: PromptText,
        step: Option<usize>,
        available: &[String],
        local: Option<&LocalStrategy>,
    ) -> Result<Reflected<ActionChoice>, ReflectError> {
        let mut usage = Usage::default();
        let first = self.first(&prompt, step, &mut usage)?;
        if let Some((action, matched_by)) = match_action(&first.content, available) {
            return Ok(Reflected {
                value: ActionChoice {
                    action,
                    matched_by,
                    attempts: 1,
                },
                usage,
            });
        }
        let reminder = format!("{}\n{}", builtin::RETRY_ACTION, render_actions(available));
        let second = self.retry(&prompt, &first.content, reminder, step, &mut usage)?;
        if let Some((action, matched_by)) = match_action(&second.content, available) {
            return Ok(Reflected {
                value: ActionChoice {
                    action,
                    matched_by,
                    attempts: 2,
                },
                usage,
            });
        }
        let fallback = local
            .and_then(|l| l.candidate_actions.first())
            .filter(|a| available.contains(a));
        match fallback {
            Some(a) => {
                tracing::warn!(step = ?step, action = %a, "decision fell back to local candidate");
                Ok(Reflected {
                    value: ActionChoice {
                        action: a.clone(),
                        matched_by: MatchKind::LocalFallback,
                        attempts: 2,
                    },
                    usage,
                })
            }
            None => Err(ReflectError::Decision {
                completion: crate::prompts::excerpt(&second.content, 200),
            }),
        }
    }
}

pub fn holistic_reflect(
    llm: &LlmReflector,
    step: Option<usize>,
    trace: &ExploreTrace,
    prev: Option<&HolisticStrategy>,
    prev_score: Option<FitnessScore>,
) -> Result<Reflected<HolisticStrategy>, ReflectError> {
    let prompt = llm
        .prompts
        .render_holistic(trace.task_instruction(), trace, prev, prev_score);
    let mut usage = Usage::default();
    let resp = llm.first(&prompt, step, &mut usage)?;
    if resp.content.trim().is_empty() {
        return Err(ReflectError::EmptyCompletion { role: "holistic" });
    }
    let (subgoals, warning) = parse_subgoals(&resp.content);
    if warning {
        tracing::warn!(step = ?step, "holistic completion had no list structure");
    }
    Ok(Reflected {
        value: next_plan(prev, step, subgoals, resp.content, warning),
        usage,
    })
}

pub fn local_reflect(
    llm: &LlmReflector,
    step: Option<usize>,
    observation: &str,
    holistic: &HolisticStrategy,
    trace: &ExploreTrace,
    available: &[String],
) -> Result<Reflected<(LocalStrategy, String)>, ReflectError> {
    let prompt = llm.prompts.render_local(observation, holistic, trace);
    let mut usage = Usage::default();
    let resp = llm.first(&prompt, step, &mut usage)?;
    let local = parse_local(&resp.content, available);
    Ok(Reflected {
        value: (local, resp.content),
        usage,
    })
}

pub fn decision_reflect(
    llm: &LlmReflector,
    step: Option<usize>,
    holistic: Option<&HolisticStrategy>,
    local: Option<&LocalStrategy>,
    observation: &str,
    available: &[String],
    priority_rule: bool,
) -> Result<Reflected<ActionChoice>, ReflectError> {
    let prompt = llm
        .prompts
        .render_decision(holistic, local, observation, available, priority_rule)?;
    llm.choose(prompt, step, available, local)
}

#[allow(clippy::too_many_arguments)]
pub fn score_analysis(
    llm: &LlmReflector,
    step: Option<usize>,
    observation: &str,
    action: &str,
    reward: f64,
    trace: &ExploreTrace,
    profile: &MilestoneProfile,
    holistic: Option<&HolisticStrategy>,
) -> Result<Reflected<ParsedScore>, ReflectError> {
    let prompt = llm
        .prompts
        .render_score(observation, action, reward, trace, profile, holistic);
    let mut usage = Usage::default();
    let first = llm.first(&prompt, step, &mut usage)?;
    let parsed = |raw: String, value: u8, warning: bool| ParsedScore {
        value: FitnessScore::new(i64::from(value)).expect("parser yields 0..=100"),
        raw,
        warning,
    };
    if let Some(v) = parse_score(&first.content) {
        return Ok(Reflected {
            value: parsed(first.content, v, false),
            usage,
        });
    }
    let second = llm.retry(
        &prompt,
        &first.content,
        builtin::RETRY_SCORE.to_string(),
        step,
        &mut usage,
    )?;
    let value = match parse_score(&second.content) {
        Some(v) => parsed(second.content, v, false),
        None => {
            tracing::warn!(step = ?step, "unscorable completion, using {FALLBACK_SCORE}");
            parsed(second.content, FALLBACK_SCORE, true)
        }
    };
    Ok(Reflected { value, usage })
}

pub fn react_reflect(
    llm: &LlmReflector,
    step: Option<usize>,
    task_type: &str,
    observation: &str,
    trace: &ExploreTrace,
    available: &[String],
) -> Result<Reflected<ActionChoice>, ReflectError> {
    let prompt = llm.prompts.render_react(task_type, observation, trace, available)?;
    llm.choose(prompt, step, available, None)
}

impl Reflector for LlmReflector {
    fn profile(&self, task_type: &str) -> MilestoneProfile {
        self.prompts.profile(task_type)
    }

    fn holistic(
        &self,
        ctx: &ReflectCtx<'_>,
        trace: &ExploreTrace,
        prev: Option<&HolisticStrategy>,
        prev_score: Option<FitnessScore>,
    ) -> Result<Reflected<HolisticStrategy>, ReflectError> {
        holistic_reflect(self, ctx.step, trace, prev, prev_score)
    }

    fn local(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        holistic: &HolisticStrategy,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<(LocalStrategy, String)>, ReflectError> {
        local_reflect(self, ctx.step, observation, holistic, trace, available)
    }

    fn decide(
        &self,
        ctx: &ReflectCtx<'_>,
        holistic: Option<&HolisticStrategy>,
        local: Option<&LocalStrategy>,
        observation: &str,
        available: &[String],
        priority_rule: bool,
    ) -> Result<Reflected<ActionChoice>, ReflectError> {
        decision_reflect(self, ctx.step, holistic, local, observation, available, priority_rule)
    }

    fn score(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        action: &str,
        reward: f64,
        trace: &ExploreTrace,
        profile: &MilestoneProfile,
        holistic: Option<&HolisticStrategy>,
    ) -> Result<Reflected<ParsedScore>, ReflectError> {
        score_analysis(self, ctx.step, observation, action, reward, trace, profile, holistic)
    }

    fn react(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<ActionChoice>, ReflectError> {
        react_reflect(self, ctx.step, ctx.task_type, observation, trace, available)
    }
}
