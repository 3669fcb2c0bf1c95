//! Dual-strategy agent runtime: a holistic plan and step-level local
//! guidance, merged by a decision call and gated by a fitness score.
//!
//! The loop lives in [`episode`]; reflecting roles in [`reflect`]; model
//! access in [`provider`]; prompt rendering in [`prompts`]; the TextHouse
//! world and its planner in [`envs`].

pub mod envs;
pub mod episode;
pub mod prompts;
pub mod provider;
pub mod reflect;
pub mod report;
pub mod score;
pub mod session;
pub mod strategy;
pub mod trace;

pub use episode::{run_batch, run_episode, BatchConfig, Episode, EpisodeConfig, EpisodeReport};
pub use reflect::{LlmReflector, OracleReflector, Reflector};
pub use score::{next_directive, FitnessBand, FitnessScore, StrategyDirective};
pub use strategy::{AgentMode, ExploreStep, HolisticStrategy, LocalStrategy};
pub use trace::ExploreTrace;
