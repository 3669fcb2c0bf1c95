//! The four reflecting roles (holistic, local, decision, score) plus the
//! single-prompt baseline, behind one [`Reflector`] trait.

mod model;
mod oracle;
pub mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::Environment;
use crate::prompts::{MilestoneProfile, PromptContractError};
use crate::provider::{ProviderError, Usage};
use crate::score::FitnessScore;
use crate::strategy::{HolisticStrategy, LocalStrategy};
use crate::trace::ExploreTrace;

pub use model::{
    decision_reflect, holistic_reflect, local_reflect, react_reflect, score_analysis, LlmReflector,
};
pub use oracle::OracleReflector;
pub use parse::MatchKind;

/// Score used when no integer can be read from two completions.
pub const FALLBACK_SCORE: u8 = 25;

#[derive(Debug, Error)]
pub enum ReflectError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptContractError),
    #[error("{role} completion was empty")]
    EmptyCompletion { role: &'static str },
    #[error("no available action in completion `{completion}`")]
    Decision { completion: String },
    #[error("oracle: {0}")]
    Oracle(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionChoice {
    pub action: String,
    pub matched_by: MatchKind,
    /// Completions requested, 1 or 2.
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedScore {
    pub value: FitnessScore,
    pub raw: String,
    /// Set when the value is [`FALLBACK_SCORE`] because nothing parsed.
    pub warning: bool,
}

/// A reflecting result with the token usage it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflected<T> {
    pub value: T,
    pub usage: Usage,
}

/// What a reflecting call is for: the step (`None` for the initial plan) and
/// the live environment. Model-backed reflectors only use `step`.
#[derive(Clone, Copy)]
pub struct ReflectCtx<'a> {
    pub step: Option<usize>,
    pub task_type: &'a str,
    pub env: &'a dyn Environment,
}

pub trait Reflector: Send + Sync {
    /// Milestone profile shown to the scorer for `task_type`.
    fn profile(&self, task_type: &str) -> MilestoneProfile {
        crate::prompts::milestone_profile(task_type)
    }

    fn holistic(
        &self,
        ctx: &ReflectCtx<'_>,
        trace: &ExploreTrace,
        prev: Option<&HolisticStrategy>,
        prev_score: Option<FitnessScore>,
    ) -> Result<Reflected<HolisticStrategy>, ReflectError>;

    /// Returns the parsed strategy and the raw completion (the local log).
    fn local(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        holistic: &HolisticStrategy,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<(LocalStrategy, String)>, ReflectError>;

    #[allow(clippy::too_many_arguments)]
    fn decide(
        &self,
        ctx: &ReflectCtx<'_>,
        holistic: Option<&HolisticStrategy>,
        local: Option<&LocalStrategy>,
        observation: &str,
        available: &[String],
        priority_rule: bool,
    ) -> Result<Reflected<ActionChoice>, ReflectError>;

    #[allow(clippy::too_many_arguments)]
    fn score(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        action: &str,
        reward: f64,
        trace: &ExploreTrace,
        profile: &MilestoneProfile,
        holistic: Option<&HolisticStrategy>,
    ) -> Result<Reflected<ParsedScore>, ReflectError>;

    fn react(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<ActionChoice>, ReflectError>;
}

impl<R: Reflector + ?Sized> Reflector for std::sync::Arc<R> {
    fn profile(&self, task_type: &str) -> MilestoneProfile {
        (**self).profile(task_type)
    }

    fn holistic(
        &self,
        ctx: &ReflectCtx<'_>,
        trace: &ExploreTrace,
        prev: Option<&HolisticStrategy>,
        prev_score: Option<FitnessScore>,
    ) -> Result<Reflected<HolisticStrategy>, ReflectError> {
        (**self).holistic(ctx, trace, prev, prev_score)
    }

    fn local(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        holistic: &HolisticStrategy,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<(LocalStrategy, String)>, ReflectError> {
        (**self).local(ctx, observation, holistic, trace, available)
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
        (**self).decide(ctx, holistic, local, observation, available, priority_rule)
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
        (**self).score(ctx, observation, action, reward, trace, profile, holistic)
    }

    fn react(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<ActionChoice>, ReflectError> {
        (**self).react(ctx, observation, trace, available)
    }
}

/// Next holistic plan metadata: version `prev + 1` (1 when there is none).
pub(crate) fn next_plan(
    prev: Option<&HolisticStrategy>,
    step: Option<usize>,
    subgoals: Vec<String>,
    rationale: String,
    parse_warning: bool,
) -> HolisticStrategy {
    HolisticStrategy {
        version: prev.map_or(1, |p| p.version + 1),
        subgoals,
        rationale,
        created_at_step: step.unwrap_or(0),
        parse_warning,
    }
}
