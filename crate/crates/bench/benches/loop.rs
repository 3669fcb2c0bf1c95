use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use dusar_core::envs::{generate_task, oracle_plan, TaskFamily, TextHouse};
use dusar_core::episode::{run_episode, EpisodeConfig};
use dusar_core::prompts::PromptSet;
use dusar_core::trace::ExploreTrace;
use dusar_core::OracleReflector;

fn oracle_episode(c: &mut Criterion) {
    let task = generate_task(7, TaskFamily::PutTwo).unwrap();
    let reflector = OracleReflector::default();
    let cfg = EpisodeConfig::default();
    c.bench_function("oracle_episode_puttwo", |b| {
        b.iter_batched(
            || TextHouse::new(task.clone()).unwrap(),
            |mut env| run_episode(&cfg, &mut env, &reflector).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn planner(c: &mut Criterion) {
    let task = generate_task(11, TaskFamily::Heat).unwrap();
    c.bench_function("oracle_plan_heat", |b| b.iter(|| oracle_plan(black_box(&task)).unwrap()));
}

fn trace_codec(c: &mut Criterion) {
    let mut env = TextHouse::new(generate_task(3, TaskFamily::Clean).unwrap()).unwrap();
    let ep = run_episode(&EpisodeConfig::default(), &mut env, &OracleReflector::default()).unwrap();
    let text = ep.trace.serialize();
    c.bench_function("trace_serialize", |b| b.iter(|| black_box(&ep.trace).serialize()));
    c.bench_function("trace_deserialize", |b| b.iter(|| ExploreTrace::deserialize(black_box(&text)).unwrap()));
}

fn prompt_render(c: &mut Criterion) {
    let prompts = PromptSet::builtin();
    let mut env = TextHouse::new(generate_task(5, TaskFamily::Cool).unwrap()).unwrap();
    let ep = run_episode(&EpisodeConfig::default(), &mut env, &OracleReflector::default()).unwrap();
    c.bench_function("render_holistic", |b| {
        b.iter(|| {
            prompts
                .render_holistic(ep.trace.task_instruction(), black_box(&ep.trace), None, None)
                .approx_tokens
        })
    });
}

criterion_group!(benches, oracle_episode, planner, trace_codec, prompt_render);
criterion_main!(benches);
