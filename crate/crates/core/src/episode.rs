//! The per-episode control loop and the batch runner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{Environment, TaskSpec, TextHouse};
use crate::provider::Usage;
use crate::reflect::{ReflectCtx, ReflectError, Reflector};
use crate::score::{next_directive, FitnessScore, StrategyDirective};
use crate::strategy::{AgentMode, ExploreStep, HolisticStrategy, LocalStrategy};
use crate::trace::{ExploreTrace, DEFAULT_WINDOW};

pub const DEFAULT_MAX_STEPS: usize = 30;

pub const ABORT_STEP_LIMIT: &str = "step limit reached";
pub const ABORT_FALSE_COMPLETION: &str = "false completion claim";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub window_size: usize,
    pub mode: AgentMode,
    pub seed: u64,
    pub task_type: String,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: DEFAULT_MAX_STEPS,
            window_size: DEFAULT_WINDOW,
            mode: AgentMode::Full,
            seed: 0,
            task_type: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub task_type: String,
    pub seed: u64,
    pub mode: AgentMode,
    pub success: bool,
    pub steps_taken: usize,
    /// Usage of every completed step; the initial plan counts toward step 1.
    pub per_step_usage: Vec<Usage>,
    /// Includes the partial step of an aborted episode.
    pub total_usage: Usage,
    /// Plan version in effect at each step (`0` when the mode has no plan).
    pub holistic_versions: Vec<(usize, u32)>,
    pub scores: Vec<u8>,
    pub final_score: FitnessScore,
    pub abort_reason: Option<String>,
    /// Unscorable completions and unstructured plans.
    pub parse_warnings: usize,
}

impl EpisodeReport {
    pub fn mean_step_usage(&self) -> (f64, f64) {
        if self.per_step_usage.is_empty() {
            return (0.0, 0.0);
        }
        let n = self.per_step_usage.len() as f64;
        let sum = self.per_step_usage.iter().fold(Usage::default(), |a, u| a + *u);
        (sum.prompt_tokens as f64 / n, sum.completion_tokens as f64 / n)
    }
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub report: EpisodeReport,
    pub trace: ExploreTrace,
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("max_steps must be at least 1")]
    ZeroSteps,
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
}

struct Run<'a> {
    cfg: &'a EpisodeConfig,
    trace: ExploreTrace,
    holistic: Option<HolisticStrategy>,
    per_step: Vec<Usage>,
    total: Usage,
    versions: Vec<(usize, u32)>,
    scores: Vec<u8>,
    warnings: usize,
}

impl Run<'_> {
    fn finish(self, success: bool, abort: Option<String>) -> Episode {
        if let Some(reason) = &abort {
            tracing::info!(reason = %reason, steps = self.trace.len(), "episode aborted");
        }
        let final_score = self.trace.last().map_or(FitnessScore::MIN, |s| s.score);
        Episode {
            report: EpisodeReport {
                task_type: self.cfg.task_type.clone(),
                seed: self.cfg.seed,
                mode: self.cfg.mode,
                success,
                steps_taken: self.trace.len(),
                per_step_usage: self.per_step,
                total_usage: self.total,
                holistic_versions: self.versions,
                scores: self.scores,
                final_score,
                abort_reason: abort,
                parse_warnings: self.warnings,
            },
            trace: self.trace,
        }
    }
}

fn failed(role: &str, step: usize, e: ReflectError) -> String {
    format!("{role} reflecting failed at step {step}: {e}")
}

/// Runs one episode. Per step: directive from the previous score, plan
/// update when directed, local reflecting, decision, environment step,
/// scoring of the new observation, trace append.
pub fn run_episode(
    cfg: &EpisodeConfig,
    env: &mut dyn Environment,
    reflector: &dyn Reflector,
) -> Result<Episode, EpisodeError> {
    if cfg.max_steps == 0 {
        return Err(EpisodeError::ZeroSteps);
    }
    let first = env.reset();
    let instruction = env.instruction().to_string();
    let task_type = if cfg.task_type.is_empty() {
        env.task_type().to_string()
    } else {
        cfg.task_type.clone()
    };
    let profile = reflector.profile(&task_type);
    let mut run = Run {
        cfg,
        trace: ExploreTrace::new(instruction, cfg.window_size, cfg.mode)?,
        holistic: None,
        per_step: Vec::new(),
        total: Usage::default(),
        versions: Vec::new(),
        scores: Vec::new(),
        warnings: 0,
    };
    if env.goal_satisfied() {
        return Ok(run.finish(true, None));
    }
    let mode = cfg.mode;
    let mut observation = first.text;
    let mut available = first.available;
    let mut prev_score: Option<FitnessScore> = None;

    for t in 1..=cfg.max_steps + 1 {
        let mut usage = Usage::default();

        // Plan routing.
        let refresh = match mode {
            AgentMode::ReactBaseline => None,
            AgentMode::NaiveConcat => Some(if t == 1 { None } else { Some(t) }),
            _ => match next_directive(t, prev_score).expect("loop keeps step/score consistent") {
                StrategyDirective::Terminate => {
                    return Ok(if env.goal_satisfied() {
                        run.finish(true, None)
                    } else {
                        run.finish(false, Some(ABORT_FALSE_COMPLETION.into()))
                    });
                }
                StrategyDirective::UseInitial => Some(None),
                StrategyDirective::Update if mode != AgentMode::LocalOnly => Some(Some(t)),
                StrategyDirective::Update | StrategyDirective::Maintain => None,
            },
        };
        if t > cfg.max_steps {
            return Ok(run.finish(false, Some(ABORT_STEP_LIMIT.into())));
        }
        if let Some(tag_step) = refresh {
            let ctx = ReflectCtx {
                step: tag_step,
                task_type: &task_type,
                env: &*env,
            };
            match reflector.holistic(&ctx, &run.trace, run.holistic.as_ref(), prev_score) {
                Ok(r) => {
                    usage += r.usage;
                    run.warnings += usize::from(r.value.parse_warning);
                    run.holistic = Some(r.value);
                }
                Err(e) => {
                    run.total += usage;
                    return Ok(run.finish(false, Some(failed("holistic", t, e))));
                }
            }
        }

        let ctx = ReflectCtx {
            step: Some(t),
            task_type: &task_type,
            env: &*env,
        };
        let (local, local_log): (Option<LocalStrategy>, String) = match mode {
            AgentMode::Full | AgentMode::LocalOnly | AgentMode::NaiveConcat => {
                let plan = run.holistic.as_ref().expect("plan exists after step 1 routing");
                match reflector.local(&ctx, &observation, plan, &run.trace, &available) {
                    Ok(r) => {
                        usage += r.usage;
                        (Some(r.value.0), r.value.1)
                    }
                    Err(e) => {
                        run.total += usage;
                        return Ok(run.finish(false, Some(failed("local", t, e))));
                    }
                }
            }
            AgentMode::HolisticOnly | AgentMode::ReactBaseline => (None, String::new()),
        };

        let choice = if mode == AgentMode::ReactBaseline {
            reflector.react(&ctx, &observation, &run.trace, &available)
        } else {
            reflector.decide(
                &ctx,
                run.holistic.as_ref(),
                local.as_ref(),
                &observation,
                &available,
                mode != AgentMode::NaiveConcat,
            )
        };
        let choice = match choice {
            Ok(r) => {
                usage += r.usage;
                r.value
            }
            Err(e) => {
                run.total += usage;
                return Ok(run.finish(false, Some(failed("decision", t, e))));
            }
        };

        let outcome = match env.step(&choice.action) {
            Ok(o) => o,
            Err(e) => {
                run.total += usage;
                return Ok(run.finish(false, Some(format!("decision error at step {t}: {e}"))));
            }
        };

        let score = if mode == AgentMode::ReactBaseline {
            FitnessScore::MIN
        } else {
            let ctx = ReflectCtx {
                step: Some(t),
                task_type: &task_type,
                env: &*env,
            };
            match reflector.score(
                &ctx,
                &outcome.observation,
                &choice.action,
                outcome.reward,
                &run.trace,
                &profile,
                run.holistic.as_ref(),
            ) {
                Ok(r) => {
                    usage += r.usage;
                    run.warnings += usize::from(r.value.warning);
                    r.value.value
                }
                Err(e) => {
                    run.total += usage;
                    return Ok(run.finish(false, Some(failed("score", t, e))));
                }
            }
        };

        let version = run.holistic.as_ref().map_or(0, |h| h.version);
        run.trace.append(ExploreStep {
            step_index: t,
            observation: outcome.observation.clone(),
            action: choice.action,
            reward: outcome.reward,
            local_log,
            score,
            holistic_version: version,
        })?;
        run.per_step.push(usage);
        run.total += usage;
        run.versions.push((t, version));
        run.scores.push(score.value());
        prev_score = Some(score);
        tracing::debug!(step = t, score = score.value(), version, "step complete");

        if outcome.done {
            return Ok(run.finish(env.goal_satisfied(), None));
        }
        observation = outcome.observation;
        available = outcome.available;
    }
    unreachable!("loop returns at step max_steps + 1")
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("task list is empty")]
    EmptyTaskList,
    #[error("parallelism must be at least 1")]
    ZeroParallelism,
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub episode: EpisodeConfig,
    pub parallelism: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            episode: EpisodeConfig::default(),
            parallelism: 1,
        }
    }
}

/// Runs every task, in order, on up to `parallelism` threads. Episode
/// failures (including invalid tasks) are recorded, never fatal.
pub fn run_batch(
    tasks: &[TaskSpec],
    cfg: &BatchConfig,
    reflector: &dyn Reflector,
) -> Result<Vec<Episode>, BatchError> {
    use rayon::prelude::*;

    if tasks.is_empty() {
        return Err(BatchError::EmptyTaskList);
    }
    if cfg.parallelism == 0 {
        return Err(BatchError::ZeroParallelism);
    }
    if cfg.episode.max_steps == 0 {
        return Err(EpisodeError::ZeroSteps.into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| BatchError::Pool(e.to_string()))?;
    let one = |task: &TaskSpec| -> Result<Episode, EpisodeError> {
        let ecfg = EpisodeConfig {
            seed: task.seed,
            task_type: task.family.as_str().to_string(),
            ..cfg.episode.clone()
        };
        match TextHouse::new(task.clone()) {
            Ok(mut env) => run_episode(&ecfg, &mut env, reflector),
            Err(e) => Ok(Episode {
                trace: ExploreTrace::new(task.instruction.clone(), ecfg.window_size, ecfg.mode)?,
                report: EpisodeReport {
                    task_type: ecfg.task_type.clone(),
                    seed: ecfg.seed,
                    mode: ecfg.mode,
                    success: false,
                    steps_taken: 0,
                    per_step_usage: Vec::new(),
                    total_usage: Usage::default(),
                    holistic_versions: Vec::new(),
                    scores: Vec::new(),
                    final_score: FitnessScore::MIN,
                    abort_reason: Some(e.to_string()),
                    parse_warnings: 0,
                },
            }),
        }
    };
    let results: Vec<Result<Episode, EpisodeError>> =
        pool.install(|| tasks.par_iter().map(one).collect());
    results.into_iter().map(|r| r.map_err(BatchError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{generate_task, oracle_plan, TaskFamily};
    use crate::reflect::OracleReflector;

    #[test]
    fn oracle_put_within_twice_bfs() {
        let task = generate_task(7, TaskFamily::Put).unwrap();
        let bfs = oracle_plan(&task).unwrap().len();
        let mut env = TextHouse::new(task).unwrap();
        let ep = run_episode(&EpisodeConfig::default(), &mut env, &OracleReflector::default()).unwrap();
        assert!(ep.report.success, "{:?}", ep.report.abort_reason);
        assert!(ep.report.steps_taken <= 2 * bfs);
        assert_eq!(ep.trace.len(), ep.report.steps_taken);
        assert_eq!(ep.report.per_step_usage.len(), ep.report.steps_taken);
        assert_eq!(*ep.report.scores.last().unwrap(), 100);
    }

    #[test]
    fn step_limit_aborts() {
        let task = generate_task(1, TaskFamily::Heat).unwrap();
        let mut env = TextHouse::new(task).unwrap();
        let cfg = EpisodeConfig {
            max_steps: 2,
            ..Default::default()
        };
        let ep = run_episode(&cfg, &mut env, &OracleReflector::default()).unwrap();
        assert!(!ep.report.success);
        assert_eq!(ep.report.steps_taken, 2);
        assert_eq!(ep.report.abort_reason.as_deref(), Some(ABORT_STEP_LIMIT));
    }

    #[test]
    fn empty_batch_is_error() {
        assert!(matches!(
            run_batch(&[], &BatchConfig::default(), &OracleReflector::default()),
            Err(BatchError::EmptyTaskList)
        ));
    }
}
