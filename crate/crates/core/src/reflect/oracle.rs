//! Rule-based reflectors that read the true TextHouse state.
//!
//! Prompts are still rendered so token accounting matches a model-backed
//! run; completion tokens are counted over the synthetic answer text.

use std::sync::Arc;

use crate::envs::{plan_from, Environment, TaskFamily, TextHouse};
use crate::prompts::{milestone_profile, MilestoneProfile, PromptSet, PromptText};
use crate::provider::{count_tokens, Usage};
use crate::score::FitnessScore;
use crate::strategy::{HolisticStrategy, LocalStrategy};
use crate::trace::ExploreTrace;

use super::parse::MatchKind;
use super::{next_plan, ActionChoice, ParsedScore, ReflectCtx, ReflectError, Reflected, Reflector};

/// Score reported before any milestone is reached.
const NO_MILESTONE_SCORE: u8 = 10;

#[derive(Clone)]
pub struct OracleReflector {
    prompts: Arc<PromptSet>,
}

impl Default for OracleReflector {
    fn default() -> Self {
        OracleReflector::new(Arc::new(PromptSet::builtin()))
    }
}

fn house<'a>(ctx: &ReflectCtx<'a>) -> Result<&'a TextHouse, ReflectError> {
    ctx.env
        .as_any()
        .downcast_ref::<TextHouse>()
        .ok_or_else(|| ReflectError::Oracle("oracle reflectors need a TextHouse environment".into()))
}

fn usage(prompt: &PromptText, answer: &str) -> Usage {
    Usage {
        prompt_tokens: prompt.approx_tokens,
        completion_tokens: count_tokens(answer),
    }
}

fn next_action(env: &TextHouse) -> Result<String, ReflectError> {
    plan_from(env)
        .map_err(|e| ReflectError::Oracle(e.to_string()))?
        .into_iter()
        .next()
        .ok_or_else(|| ReflectError::Oracle("goal already satisfied".into()))
}

fn decompose(env: &TextHouse) -> Vec<String> {
    let t = env.task();
    let obj = &t.goal.object_kind;
    let target = t.goal.target_kind.as_deref().unwrap_or("");
    let steps: Vec<String> = match t.family {
        TaskFamily::Put => vec![
            format!("find a {obj}"),
            format!("take the {obj}"),
            format!("go to a {target}"),
            format!("put the {obj} in/on the {target}"),
        ],
        TaskFamily::Examine => vec![
            format!("find a {obj}"),
            format!("take the {obj}"),
            "go to the desklamp".to_string(),
            "use the desklamp".to_string(),
        ],
        TaskFamily::Clean | TaskFamily::Heat | TaskFamily::Cool => {
            let (verb, tool) = match t.family {
                TaskFamily::Clean => ("clean", "sinkbasin"),
                TaskFamily::Heat => ("heat", "microwave"),
                _ => ("cool", "fridge"),
            };
            vec![
                format!("find a {obj}"),
                format!("take the {obj}"),
                format!("go to the {tool}"),
                format!("{verb} the {obj} with the {tool}"),
                format!("go to a {target}"),
                format!("put the {obj} in/on the {target}"),
            ]
        }
        TaskFamily::PutTwo => vec![
            format!("find the first {obj}"),
            format!("take the first {obj}"),
            format!("find the second {obj}"),
            format!("take the second {obj}"),
            format!("go to a {target}"),
            format!("put both {obj}s in/on the {target}"),
        ],
    };
    steps
}

impl OracleReflector {
    pub fn new(prompts: Arc<PromptSet>) -> Self {
        OracleReflector { prompts }
    }

    /// Highest threshold whose milestone and all earlier ones hold; goal → 100.
    pub fn true_score(env: &TextHouse, profile: &MilestoneProfile) -> FitnessScore {
        if env.goal_satisfied() {
            return FitnessScore::MAX;
        }
        let flags = env.milestones();
        let own = milestone_profile(env.task_type());
        let scores = if profile.scores().len() == flags.len() {
            profile.scores()
        } else {
            own.scores()
        };
        let reached = flags.iter().take_while(|f| **f).count();
        let value = match reached {
            0 => NO_MILESTONE_SCORE,
            k => scores[k - 1].min(99),
        };
        FitnessScore::new(i64::from(value)).expect("threshold within range")
    }
}

impl Reflector for OracleReflector {
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
        let env = house(ctx)?;
        let prompt = self
            .prompts
            .render_holistic(trace.task_instruction(), trace, prev, prev_score);
        let subgoals = decompose(env);
        let answer = subgoals
            .iter()
            .enumerate()
            .map(|(i, g)| format!("{}. {g}", i + 1))
            .collect::<Vec<_>>()
            .join("\n");
        Ok(Reflected {
            usage: usage(&prompt, &answer),
            value: next_plan(prev, ctx.step, subgoals, answer, false),
        })
    }

    fn local(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        holistic: &HolisticStrategy,
        trace: &ExploreTrace,
        _available: &[String],
    ) -> Result<Reflected<(LocalStrategy, String)>, ReflectError> {
        let env = house(ctx)?;
        let prompt = self.prompts.render_local(observation, holistic, trace);
        let remaining = plan_from(env).map_err(|e| ReflectError::Oracle(e.to_string()))?;
        let action = remaining
            .first()
            .cloned()
            .ok_or_else(|| ReflectError::Oracle("goal already satisfied".into()))?;
        let local = LocalStrategy {
            guidance: format!("{} action(s) remain on the shortest path", remaining.len()),
            candidate_actions: vec![action.clone()],
            alignment_note: "on the shortest path to the goal".into(),
        };
        let log = format!(
            "Action: {action}\nAlignment: {}\nGuidance: {}",
            local.alignment_note, local.guidance
        );
        Ok(Reflected {
            usage: usage(&prompt, &log),
            value: (local, log),
        })
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
        let prompt = self
            .prompts
            .render_decision(holistic, local, observation, available, priority_rule)?;
        let action = match local
            .and_then(|l| l.candidate_actions.first())
            .filter(|a| available.contains(a))
        {
            Some(a) => a.clone(),
            None => next_action(house(ctx)?)?,
        };
        Ok(Reflected {
            usage: usage(&prompt, &action),
            value: ActionChoice {
                action,
                matched_by: MatchKind::Exact,
                attempts: 1,
            },
        })
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
        let env = house(ctx)?;
        let prompt = self
            .prompts
            .render_score(observation, action, reward, trace, profile, holistic);
        let value = OracleReflector::true_score(env, profile);
        let raw = value.to_string();
        Ok(Reflected {
            usage: usage(&prompt, &raw),
            value: ParsedScore {
                value,
                raw,
                warning: false,
            },
        })
    }

    fn react(
        &self,
        ctx: &ReflectCtx<'_>,
        observation: &str,
        trace: &ExploreTrace,
        available: &[String],
    ) -> Result<Reflected<ActionChoice>, ReflectError> {
        let env = house(ctx)?;
        let prompt = self
            .prompts
            .render_react(ctx.task_type, observation, trace, available)?;
        let action = next_action(env)?;
        let answer = format!("think: follow the shortest path\nact: {action}");
        Ok(Reflected {
            usage: usage(&prompt, &answer),
            value: ActionChoice {
                action,
                matched_by: MatchKind::Exact,
                attempts: 1,
            },
        })
    }
}
