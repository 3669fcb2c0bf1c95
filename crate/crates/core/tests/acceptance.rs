//! Exit-gate checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use dusar_core::envs::{
    generate_task, generate_tasks, load_task_file, oracle_plan, Environment, TaskFamily, TaskSpec, TextHouse,
};
use dusar_core::episode::{run_batch, run_episode, BatchConfig, Episode, EpisodeConfig};
use dusar_core::prompts::PromptSet;
use dusar_core::provider::{
    load_fixture, ChatMessage, CompletionRequest, CompletionResponse, Provider, ProviderError, DEFAULT_MAX_TOKENS,
};
use dusar_core::score::{next_directive, FitnessScore, StrategyDirective};
use dusar_core::strategy::{AgentMode, ExploreStep};
use dusar_core::trace::ExploreTrace;
use dusar_core::{LlmReflector, OracleReflector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The band partition written out independently of `FitnessScore::band`.
fn expected_directive(t: usize, prev: Option<i64>) -> Option<StrategyDirective> {
    match (t, prev) {
        (1, None) => Some(StrategyDirective::UseInitial),
        (1, Some(_)) | (_, None) => None,
        (_, Some(0)) => Some(StrategyDirective::Update),
        (_, Some(s)) if (1..50).contains(&s) => Some(StrategyDirective::Maintain),
        (_, Some(s)) if (50..100).contains(&s) => Some(StrategyDirective::Update),
        (_, Some(100)) => Some(StrategyDirective::Terminate),
        _ => None,
    }
}

fn directive_partition() -> Outcome {
    let mut cases = 0;
    for t in [1usize, 2] {
        let got = next_directive(t, None).ok();
        ensure(got == expected_directive(t, None), || format!("t={t} no score: {got:?}"))?;
        cases += 1;
        for s in 0..=100i64 {
            let got = next_directive(t, Some(FitnessScore::new(s).unwrap())).ok();
            ensure(got == expected_directive(t, Some(s)), || format!("t={t} s={s}: {got:?}"))?;
            cases += 1;
        }
    }
    for bad in [-1i64, 101, 1000] {
        ensure(FitnessScore::new(bad).is_err(), || format!("score {bad} accepted"))?;
    }
    ensure(next_directive(0, None).is_err(), || "step 0 accepted".into())?;
    Ok(format!("{cases} cases"))
}

fn saltshaker_episode() -> Result<Episode, String> {
    let task = load_task_file(&fixture("saltshaker.task")).map_err(|e| e.to_string())?;
    let provider = load_fixture(&fixture("saltshaker.fixture.jsonl")).map_err(|e| e.to_string())?;
    let reflector = LlmReflector::new(Arc::new(provider), Arc::new(PromptSet::builtin()), "scripted");
    let cfg = EpisodeConfig {
        max_steps: 7,
        ..Default::default()
    };
    let mut env = TextHouse::new(task).map_err(|e| e.to_string())?;
    run_episode(&cfg, &mut env, &reflector).map_err(|e| e.to_string())
}

fn saltshaker_replay() -> Outcome {
    let a = saltshaker_episode()?;
    let b = saltshaker_episode()?;
    let scores = &a.report.scores;
    ensure(scores.len() >= 6 && scores[..6] == [25, 25, 25, 25, 25, 50], || {
        format!("scores {scores:?}")
    })?;
    let versions: Vec<u32> = a.report.holistic_versions.iter().map(|v| v.1).collect();
    ensure(versions == [1, 1, 1, 1, 1, 1, 2], || format!("versions {versions:?}"))?;
    let text = a.trace.serialize();
    ensure(text == b.trace.serialize(), || "two runs differ".into())?;
    let golden = std::fs::read_to_string(fixture("saltshaker.trace.jsonl")).map_err(|e| e.to_string())?;
    ensure(text == golden, || "trace differs from golden file".into())?;
    let back = ExploreTrace::deserialize(&golden).map_err(|e| e.to_string())?;
    ensure(back.serialize() == golden, || "golden file does not round-trip".into())?;
    Ok(format!("scores {:?}", &scores[..6]))
}

fn sixty_tasks() -> Vec<TaskSpec> {
    generate_tasks(0, 10).expect("generated tasks")
}

fn batch(tasks: &[TaskSpec], mode: AgentMode, reflector: &dyn dusar_core::Reflector) -> Result<Vec<Episode>, String> {
    let cfg = BatchConfig {
        episode: EpisodeConfig {
            mode,
            ..Default::default()
        },
        parallelism: 4,
    };
    run_batch(tasks, &cfg, reflector).map_err(|e| e.to_string())
}

fn is_subsequence(needle: &[u8], hay: &[u8]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn oracle_end_to_end() -> Outcome {
    let tasks = sixty_tasks();
    ensure(tasks.len() == 60, || format!("{} tasks", tasks.len()))?;
    let eps = batch(&tasks, AgentMode::Full, &OracleReflector::default())?;
    let mut worst = 0.0f64;
    for (task, ep) in tasks.iter().zip(&eps) {
        let r = &ep.report;
        ensure(r.success, || format!("{} seed {} failed: {:?}", r.task_type, r.seed, r.abort_reason))?;
        let bfs = oracle_plan(task).map_err(|e| e.to_string())?.len();
        ensure(r.steps_taken <= 2 * bfs, || {
            format!("{} seed {}: {} steps vs bfs {bfs}", r.task_type, r.seed, r.steps_taken)
        })?;
        worst = worst.max(r.steps_taken as f64 / bfs as f64);
        if task.family == TaskFamily::PutTwo {
            ensure(is_subsequence(&[25, 50, 75, 90, 100], &r.scores), || {
                format!("puttwo seed {} scores {:?}", r.seed, r.scores)
            })?;
        }
    }
    Ok(format!("SR 100% over 60, worst steps/bfs {worst:.2}"))
}

fn oracle_plan_validity() -> Outcome {
    let mut min_puttwo = usize::MAX;
    for i in 0..200u64 {
        let family = TaskFamily::ALL[(i % 6) as usize];
        let task = generate_task(5000 + i, family).map_err(|e| e.to_string())?;
        let plan = oracle_plan(&task).map_err(|e| format!("{family} {i}: {e}"))?;
        let mut env = TextHouse::new(task).map_err(|e| e.to_string())?;
        env.reset();
        let mut last = None;
        for a in &plan {
            last = Some(env.step(a).map_err(|e| format!("{family} {i}: {a}: {e}"))?);
        }
        let last = last.ok_or_else(|| format!("{family} {i}: empty plan"))?;
        ensure(last.done && last.reward == 1.0, || format!("{family} {i}: plan does not finish"))?;
        if family == TaskFamily::PutTwo {
            min_puttwo = min_puttwo.min(plan.len());
        }
    }
    ensure(min_puttwo >= 6, || format!("puttwo plan of length {min_puttwo}"))?;
    Ok(format!("200 plans, shortest puttwo {min_puttwo}"))
}

/// Random completions for every role: garbage, out-of-range scores and
/// paraphrased or exact actions scraped from the prompt.
struct Adversary(Mutex<ChaCha8Rng>);

impl Provider for Adversary {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        let mut rng = self.0.lock().unwrap();
        let prompt = req.messages[0].content.clone();
        let actions: Vec<&str> = prompt
            .lines()
            .filter_map(|l| l.strip_prefix("- "))
            .filter(|l| !l.contains(':'))
            .collect();
        if rng.random_ratio(1, 100) {
            return Err(ProviderError::Transport { attempts: 1, message: "reset".into() });
        }
        let garbage = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
            0 => String::new(),
            1 => "{{window}} «» \u{0}\\n ```".to_string(),
            2 => "1. a\n- b\n(3) c".to_string(),
            _ => "go to the moon 1".to_string(),
        };
        let role = req.tag.map_or("", |t| t.role.as_str());
        let content = match role {
            "decision" | "react" | "local" if !actions.is_empty() && rng.random_ratio(4, 5) => {
                let a = actions[rng.random_range(0..actions.len())];
                match rng.random_range(0..3) {
                    0 => a.to_string(),
                    1 => format!("I will: {}.", a.to_uppercase()),
                    _ => format!("think: hmm\nAction: {a}"),
                }
            }
            "score" => match rng.random_range(0..5) {
                0 => format!("{}", rng.random_range(-500i64..500)),
                1 => format!("Score: {}", [0, 49, 50, 99, 100][rng.random_range(0..5)]),
                2 => "12.5 out of 100/100".to_string(),
                _ => garbage(&mut rng),
            },
            "holistic" if rng.random_ratio(9, 10) => "(1) look (2) act".to_string(),
            _ => garbage(&mut rng),
        };
        Ok(CompletionResponse::estimated(req, content))
    }
}

fn randomized_termination() -> Outcome {
    let mut aborted = 0;
    let mut steps = 0;
    for seed in 0..1000u64 {
        let family = TaskFamily::ALL[(seed % 6) as usize];
        let task = generate_task(seed % 97, family).map_err(|e| e.to_string())?;
        let provider = Adversary(Mutex::new(ChaCha8Rng::seed_from_u64(seed)));
        let r = LlmReflector::new(Arc::new(provider), Arc::new(PromptSet::builtin()), "m");
        let cfg = EpisodeConfig {
            max_steps: 1 + (seed % 20) as usize,
            mode: AgentMode::ALL[(seed % 5) as usize],
            ..Default::default()
        };
        let mut env = TextHouse::new(task.clone()).map_err(|e| e.to_string())?;
        let ep = run_episode(&cfg, &mut env, &r).map_err(|e| format!("seed {seed}: {e}"))?;
        let rep = &ep.report;
        let n = rep.steps_taken;
        steps += n;
        ensure(n <= cfg.max_steps, || format!("seed {seed}: {n} steps"))?;
        ensure(
            ep.trace.len() == n && rep.scores.len() == n && rep.holistic_versions.len() == n,
            || format!("seed {seed}: inconsistent report {rep:?}"),
        )?;
        ensure(rep.success || rep.abort_reason.is_some(), || format!("seed {seed}: no outcome"))?;
        if rep.abort_reason.is_some() {
            aborted += 1;
        }
        let mut check = TextHouse::new(task).map_err(|e| e.to_string())?;
        let mut available = check.reset().available;
        for s in ep.trace.steps() {
            ensure(available.contains(&s.action), || format!("seed {seed}: `{}` not available", s.action))?;
            available = check.step(&s.action).map_err(|e| e.to_string())?.available;
        }
    }
    Ok(format!("1000 episodes, {aborted} aborted, mean steps {:.1}", steps as f64 / 1000.0))
}

fn arb_step() -> impl Strategy<Value = (String, String, f64, String, u8, u32)> {
    let reward = prop_oneof![
        Just(0.0),
        Just(1.0),
        proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
    ];
    (any::<String>(), ".{0,40}", reward, any::<String>(), 0u8..=100, 0u32..50)
}

fn arb_trace() -> impl Strategy<Value = ExploreTrace> {
    (
        any::<String>(),
        1usize..40,
        0usize..5,
        prop::collection::vec(arb_step(), 0..25),
    )
        .prop_map(|(task, k, mode, steps)| {
            let mut trace = ExploreTrace::new(task, k, AgentMode::ALL[mode]).unwrap();
            for (i, (observation, action, reward, local_log, score, v)) in steps.into_iter().enumerate() {
                trace
                    .append(ExploreStep {
                        step_index: i + 1,
                        observation,
                        action,
                        reward,
                        local_log,
                        score: FitnessScore::new(i64::from(score)).unwrap(),
                        holistic_version: v,
                    })
                    .unwrap();
            }
            trace
        })
}

fn serialization_round_trip() -> Outcome {
    let cases = 600;
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&arb_trace(), |trace| {
            let text = trace.serialize();
            let back = ExploreTrace::deserialize(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &trace);
            prop_assert_eq!(back.serialize(), text);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} traces"))
}

fn mean_prompt_per_step(eps: &[Episode]) -> f64 {
    let steps: usize = eps.iter().map(|e| e.report.per_step_usage.len()).sum();
    let prompt: u64 = eps.iter().flat_map(|e| &e.report.per_step_usage).map(|u| u.prompt_tokens).sum();
    prompt as f64 / steps as f64
}

fn token_direction() -> Outcome {
    let tasks = sixty_tasks();
    let oracle = OracleReflector::default();
    let full = mean_prompt_per_step(&batch(&tasks, AgentMode::Full, &oracle)?);
    let react = mean_prompt_per_step(&batch(&tasks, AgentMode::ReactBaseline, &oracle)?);
    let ratio = react / full;
    let detail = format!("react {react:.1} / full {full:.1} = {ratio:.2}, need >= 1.50");
    if full < react && ratio >= 1.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ablation_plumbing() -> Outcome {
    let tasks = sixty_tasks();
    let oracle = OracleReflector::default();
    for mode in [AgentMode::Full, AgentMode::HolisticOnly, AgentMode::LocalOnly, AgentMode::NaiveConcat] {
        let eps = batch(&tasks, mode, &oracle)?;
        ensure(eps.len() == 60, || format!("{mode}: {} episodes", eps.len()))?;
        for ep in &eps {
            let r = &ep.report;
            ensure(r.steps_taken > 0, || format!("{mode} seed {}: no steps ({:?})", r.seed, r.abort_reason))?;
            let versions: Vec<u32> = r.holistic_versions.iter().map(|v| v.1).collect();
            match mode {
                AgentMode::LocalOnly => ensure(versions.iter().all(|&v| v == 1), || {
                    format!("local_only seed {} versions {versions:?}", r.seed)
                })?,
                AgentMode::NaiveConcat => ensure(versions.iter().copied().eq(1..=versions.len() as u32), || {
                    format!("naive_concat seed {} versions {versions:?}", r.seed)
                })?,
                AgentMode::HolisticOnly => ensure(ep.trace.steps().iter().all(|s| s.local_log.is_empty()), || {
                    format!("holistic_only seed {} has local logs", r.seed)
                })?,
                _ => {}
            }
        }
    }
    Ok("4 modes x 60 tasks".into())
}

fn default_request_parameters() -> Outcome {
    let req = CompletionRequest::new("m", vec![ChatMessage::user("hi")]);
    let body = serde_json::to_value(&req).map_err(|e| e.to_string())?;
    let want = [("temperature", 0.0), ("top_p", 0.8), ("presence_penalty", 0.1), ("frequency_penalty", 0.1)];
    for (k, v) in want {
        ensure(body[k].as_f64() == Some(v), || format!("{k} = {}", body[k]))?;
    }
    ensure(req.max_tokens == Some(DEFAULT_MAX_TOKENS), || "max_tokens".into())?;

    let llm = LlmReflector::new(Arc::new(dusar_core::provider::EchoProvider), Arc::new(PromptSet::builtin()), "m");
    let t = llm.request_template();
    ensure(
        t.temperature == 0.0 && t.top_p == 0.8 && t.presence_penalty == 0.1 && t.frequency_penalty == 0.1,
        || format!("reflector template {t:?}"),
    )?;
    let mut custom = req.clone();
    custom.temperature = 0.7;
    let llm = llm.with_request(custom);
    ensure(llm.request_template().temperature == 0.7, || "override ignored".into())?;
    Ok("temperature 0, top_p 0.8, penalties 0.1".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("directive partition, exhaustive", Duration::from_secs(1), directive_partition),
        ("saltshaker trace replay", Duration::from_secs(1), saltshaker_replay),
        ("oracle end-to-end on 60 tasks", Duration::from_secs(30), oracle_end_to_end),
        ("oracle plan validity on 200 tasks", Duration::from_secs(60), oracle_plan_validity),
        ("termination under adversarial completions", Duration::from_secs(60), randomized_termination),
        ("trace serialization round trip", Duration::from_secs(60), serialization_round_trip),
        ("prompt token direction vs react baseline", Duration::from_secs(60), token_direction),
        ("ablation plumbing", Duration::from_secs(60), ablation_plumbing),
        ("default request parameters", Duration::from_secs(1), default_request_parameters),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > limit => Err(format!("{d}; took {took:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({took:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({took:.2?})");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
